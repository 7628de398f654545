from typing import List, Optional, Tuple
import math
import numpy as np
from statsmodels.tsa.stattools import acf

from . import error
from .engine import BacktestReport

class ResidualSeries:
	__slots__ = ('variable', 'state', 'times', 'values')
	
	variable: str
	state: str
	times: List[int]
	values: np.ndarray
	
	def __init__(self, variable: str, state: str, times: List[int], values: np.ndarray) -> None:
		self.variable = variable
		self.state = state
		self.times = times
		self.values = values
	
	def __len__(self) -> int:
		return self.values.size

def residuals(report: BacktestReport, variable: str, state: str) -> ResidualSeries:
	index = report.model.variable(variable).index(state)
	times = []
	values = []
	previous = None
	for row in report.rows:
		# Observation at t against the forecast made at t - 1
		observed = row.observed.get(variable)
		if previous is not None and previous.t == row.t - 1 and observed is not None:
			forecast = previous.forecast[variable][index]
			times.append(row.t)
			values.append((1.0 if observed == state else 0.0) - forecast)
		previous = row
	return ResidualSeries(variable, state, times, np.array(values, dtype = np.float64))

class AcfReport:
	__slots__ = ('autocorrelations', 'n', 'band', 'flagged')
	
	# autocorrelations[k - 1] is the lag-k value
	autocorrelations: np.ndarray
	n: int
	band: float
	flagged: List[int]
	
	def __init__(self, autocorrelations: np.ndarray, n: int) -> None:
		self.autocorrelations = autocorrelations
		self.n = n
		self.band = 2.0 / math.sqrt(n)
		self.flagged = [k + 1 for k, r in enumerate(autocorrelations) if abs(r) > self.band]
	
	@property
	def max_lag(self) -> int:
		return self.autocorrelations.size
	
	def lag(self, k: int) -> float:
		return float(self.autocorrelations[k - 1])

def sample_acf(series: np.ndarray, max_lag: Optional[int] = None) -> AcfReport:
	import settings
	k = settings.ACF_MAX_LAG if max_lag is None else max_lag
	x = np.asarray(series, dtype = np.float64)
	if k < 1 or x.size <= k:
		raise error.SeriesTooShort("autocorrelation to lag {} needs more than {} values, got {}".format(k, k, x.size))
	if not np.ptp(x) > 0.0:
		raise error.UndefinedAcf("series has zero variance; autocorrelation is undefined")
	rho = acf(x, nlags = k, fft = False)
	return AcfReport(np.asarray(rho[1:]), x.size)

class WhitenessReport:
	__slots__ = ('n', 'mean', 'std', 'z', 'acf')
	
	n: int
	mean: float
	std: float
	z: float
	acf: AcfReport
	
	def __init__(self, n: int, mean: float, std: float, z: float, acf: AcfReport) -> None:
		self.n = n
		self.mean = mean
		self.std = std
		self.z = z
		self.acf = acf
	
	@property
	def flagged(self) -> List[int]:
		return self.acf.flagged
	
	@property
	def adequate(self) -> bool:
		return abs(self.z) < 2.0 and not self.acf.flagged
	
	@property
	def verdict(self) -> str:
		return 'adequate' if self.adequate else 'inadequate'
	
	def lags(self) -> List[Tuple[int, float, bool]]:
		return [(k, self.acf.lag(k), k in self.acf.flagged) for k in range(1, self.acf.max_lag + 1)]

def whiteness_summary(series: np.ndarray, max_lag: Optional[int] = None) -> WhitenessReport:
	import settings
	x = np.asarray(series, dtype = np.float64)
	if x.size < settings.WHITENESS_MIN_LENGTH:
		raise error.SeriesTooShort("whiteness check needs at least {} residuals, got {}".format(settings.WHITENESS_MIN_LENGTH, x.size))
	report = sample_acf(x, max_lag)
	mean = float(x.mean())
	std = float(x.std(ddof = 1))
	z = mean / (std / math.sqrt(x.size))
	return WhitenessReport(x.size, mean, std, z, report)
