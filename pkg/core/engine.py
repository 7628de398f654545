from typing import Any, Dict, List, Tuple, Mapping, Iterable, Optional
import pandas as pd

from util.misc import Logger

from . import error
from .models import Variable, Distribution, Evidence
from .network import posterior_eliminate, forward_sample
from .dnm import CompiledModel, SliceWindow, GroundNetwork, ground, scroll, unroll, node_name, resolve_alphas
from .estimation import WeightEstimate, mle_alpha_window

Series = Iterable[Tuple[int, Mapping[str, str]]]

class ObservationHistory:
	__slots__ = ('model', 'slices')
	
	model: CompiledModel
	slices: Dict[int, Dict[str, str]]
	
	def __init__(self, model: CompiledModel) -> None:
		self.model = model
		self.slices = {}
	
	@property
	def time(self) -> int:
		return max(self.slices, default = -1)
	
	def record(self, t: int, assignments: Mapping[str, str]) -> None:
		if t < 0:
			raise error.MalformedSeries("time index {} is negative".format(t))
		if t > self.time + 1:
			raise error.MalformedSeries("observation at {} skips ahead of time {}".format(t, self.time))
		for name, state in assignments.items():
			self.model.variable(name).index(state)
		current = self.slices.get(t, {})
		for name, state in assignments.items():
			if current.get(name, state) != state:
				raise error.ConflictingObservation("'{}' at {} is already observed as {}, not {}".format(name, t, current[name], state))
		self.slices[t] = { **current, **assignments }
	
	def get(self, t: int, name: str) -> Optional[str]:
		return self.slices.get(t, {}).get(name)
	
	def slice(self, t: int) -> Dict[str, str]:
		return dict(self.slices.get(t, {}))
	
	def fully_observed(self, t: int) -> bool:
		return len(self.slices.get(t, ())) == len(self.model.variables)
	
	def evidence(self, first: int, last: int) -> Evidence:
		return Evidence({
			node_name(name, s): state
			for s in range(first, last + 1)
			for name, state in self.slices.get(s, {}).items()
		})

class ForecastProfile:
	__slots__ = ('origin', 'variables', 'entries')
	
	origin: int
	variables: Dict[str, Variable]
	# entries[h - 1] holds the marginals at slice origin + h
	entries: List[Dict[str, Distribution]]
	
	def __init__(self, origin: int, variables: Iterable[Variable], entries: List[Dict[str, Distribution]]) -> None:
		self.origin = origin
		self.variables = { v.name: v for v in variables }
		self.entries = entries
	
	def __len__(self) -> int:
		return len(self.entries)
	
	def at(self, h: int, name: str) -> Distribution:
		if not 1 <= h <= len(self.entries):
			raise error.InvalidHorizon("horizon {} is outside 1..{}".format(h, len(self.entries)))
		return self.entries[h - 1][name]
	
	def probability(self, h: int, name: str, state: str) -> float:
		v = self.variables.get(name)
		if v is None:
			raise error.UnknownVariable("'{}' is not a model variable".format(name))
		return self.at(h, name)[v.index(state)]

class Session:
	__slots__ = ('model', 'history', 'window', 'alphas', 'trace', '_logger')
	
	model: CompiledModel
	history: ObservationHistory
	window: int
	alphas: Dict[str, float]
	trace: Dict[str, List[Tuple[int, WeightEstimate]]]
	_logger: Logger
	
	def __init__(self, model: CompiledModel, *, window: Optional[int] = None, alphas: Optional[Mapping[str, float]] = None) -> None:
		import settings
		self.model = model
		self.history = ObservationHistory(model)
		self.window = settings.DEFAULT_WINDOW if window is None else window
		if self.window < 1:
			raise error.IncompleteWindow("estimation window must be at least 1, got {}".format(self.window))
		self.alphas = resolve_alphas(model, alphas)
		self.trace = { name: [] for name in model.mixture_nodes }
		self._logger = Logger('session', self, gate = 'DEBUG_ENGINE')
	
	@property
	def time(self) -> int:
		return self.history.time
	
	def observe(self, t: int, assignments: Mapping[str, str]) -> None:
		self.history.record(t, assignments)
	
	def update_weights(self) -> Dict[str, WeightEstimate]:
		t = self.time
		updated = {}
		for name in self.model.mixture_nodes:
			window = min(self.window, t - self.model.node_lag[name] + 1)
			if window < 1:
				continue
			try:
				estimate = mle_alpha_window(self.model, self.history, name, window, self.alphas[name], t = t)
			except error.IncompleteWindow as ex:
				self._logger.info('skip update', name, 'at', t, ex)
				continue
			self.alphas[name] = estimate.alpha_star
			self.trace[name].append((t, estimate))
			updated[name] = estimate
		return updated
	
	def alpha_trace(self, name: str) -> List[Tuple[int, float]]:
		self.model.mixture(name)
		return [(t, e.alpha_star) for t, e in self.trace[name]]
	
	def forecast(self, horizon: int) -> ForecastProfile:
		if horizon < 1:
			raise error.InvalidHorizon("forecast horizon must be at least 1, got {}".format(horizon))
		t = self.time
		window = self._forecast_window(t)
		evidence = self.history.evidence(window.first, t)
		
		entries = []
		for h in range(1, horizon + 1):
			grounded = ground(window)
			_check_required(grounded, evidence)
			entries.append(_marginals(grounded, evidence, t + h))
			window = scroll(window)
		self._logger.info('forecast', t, 'horizon', horizon, 'window', window.first)
		return ForecastProfile(t, self.model.variables, entries)
	
	def _forecast_window(self, t: int) -> SliceWindow:
		# Leading slices fully observed cut every path to earlier history
		m = self.model.max_lag
		for b in range(t + 1, m - 1, -1):
			if all(self.history.fully_observed(s) for s in range(b - m, b)):
				return SliceWindow(self.model, b - m, t + 1, context = m, alphas = self.alphas)
		return SliceWindow(self.model, 0, t + 1, alphas = self.alphas)

def _check_required(grounded: GroundNetwork, evidence: Evidence) -> None:
	missing = sorted(name for name in grounded.required if name not in evidence)
	if missing:
		raise error.MissingInitialObservation("initial slices need observations for {}".format(', '.join(missing)))

def _marginals(grounded: GroundNetwork, evidence: Evidence, s: int) -> Dict[str, Distribution]:
	return {
		v.name: posterior_eliminate(grounded.network, evidence, node_name(v.name, s))
		for v in grounded.window.model.variables
	}

def forecast_unrolled(model: CompiledModel, history: ObservationHistory, alphas: Mapping[str, float], horizon: int) -> ForecastProfile:
	if horizon < 1:
		raise error.InvalidHorizon("forecast horizon must be at least 1, got {}".format(horizon))
	t = history.time
	grounded = unroll(model, t + horizon, alphas = alphas)
	evidence = history.evidence(0, t)
	_check_required(grounded, evidence)
	entries = [_marginals(grounded, evidence, t + h) for h in range(1, horizon + 1)]
	return ForecastProfile(t, model.variables, entries)

def replay(model: CompiledModel, series: Series, *, window: Optional[int] = None, update: bool = True) -> Session:
	session = Session(model, window = window)
	for t, assignments in series:
		session.observe(t, assignments)
		if update:
			session.update_weights()
	return session

class BacktestRow:
	__slots__ = ('t', 'alphas', 'estimates', 'forecast', 'observed')
	
	t: int
	alphas: Dict[str, float]
	estimates: Dict[str, WeightEstimate]
	# Horizon-one marginals for slice t + 1
	forecast: Dict[str, Distribution]
	observed: Dict[str, str]
	
	def __init__(self, t: int, alphas: Dict[str, float], estimates: Dict[str, WeightEstimate], forecast: Dict[str, Distribution], observed: Dict[str, str]) -> None:
		self.t = t
		self.alphas = alphas
		self.estimates = estimates
		self.forecast = forecast
		self.observed = observed

class BacktestReport:
	__slots__ = ('model', 'designated', 'rows')
	
	model: CompiledModel
	designated: Dict[str, str]
	rows: List[BacktestRow]
	
	def __init__(self, model: CompiledModel, designated: Mapping[str, str], rows: List[BacktestRow]) -> None:
		self.model = model
		self.designated = dict(designated)
		self.rows = rows
	
	def __len__(self) -> int:
		return len(self.rows)
	
	def row(self, t: int) -> BacktestRow:
		for row in self.rows:
			if row.t == t:
				return row
		raise KeyError(t)
	
	def forecast_probability(self, t: int, name: str, state: str) -> float:
		return self.row(t).forecast[name][self.model.variable(name).index(state)]
	
	def to_frame(self) -> pd.DataFrame:
		records = []
		for row in self.rows:
			record: Dict[str, Any] = { 't': row.t }
			for name in self.model.mixture_nodes:
				record['alpha_star:{}'.format(name)] = row.alphas[name]
			for name, state in self.designated.items():
				record['forecast:{}={}'.format(name, state)] = self.forecast_probability(row.t, name, state)
			for name in self.model.names:
				record['observed:{}'.format(name)] = row.observed.get(name, '')
			records.append(record)
		return pd.DataFrame.from_records(records, columns = self.columns())
	
	def columns(self) -> List[str]:
		return (
			['t']
			+ ['alpha_star:{}'.format(name) for name in self.model.mixture_nodes]
			+ ['forecast:{}={}'.format(name, state) for name, state in self.designated.items()]
			+ ['observed:{}'.format(name) for name in self.model.names]
		)

def designated_states(model: CompiledModel, state_map: Optional[Mapping[str, str]] = None) -> Dict[str, str]:
	if not state_map:
		return { v.name: v.states[0] for v in model.variables }
	for name, state in state_map.items():
		model.variable(name).index(state)
	return { name: state_map[name] for name in model.names if name in state_map }

def backtest(model: CompiledModel, series: Series, *, window: Optional[int] = None, designated: Optional[Mapping[str, str]] = None, update: bool = True) -> BacktestReport:
	session = Session(model, window = window)
	rows = []
	for t, assignments in series:
		session.observe(t, assignments)
		estimates = session.update_weights() if update else {}
		if t < model.max_lag:
			continue
		profile = session.forecast(1)
		rows.append(BacktestRow(t, dict(session.alphas), estimates, profile.entries[0], session.history.slice(t)))
	return BacktestReport(model, designated_states(model, designated), rows)

def simulate_series(model: CompiledModel, periods: int, seed: int) -> List[Tuple[int, Dict[str, str]]]:
	if periods < 1:
		raise error.SeriesTooShort("cannot simulate {} periods".format(periods))
	grounded = unroll(model, periods - 1)
	sample = forward_sample(grounded.network, seed, 1)[0]
	return [
		(s, { name: sample[node_name(name, s)] for name in model.names })
		for s in range(periods)
	]
