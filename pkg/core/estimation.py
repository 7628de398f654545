from typing import List, Optional, Tuple, Sequence, TYPE_CHECKING
from enum import Enum
import numpy as np
from scipy.optimize import minimize_scalar

from util.misc import Logger

from . import error
from .models import Distribution
from .dnm import CompiledModel, MixtureCPD, Decomposition

if TYPE_CHECKING:
	from .engine import ObservationHistory

class Branch(Enum):
	Interior = 'interior'
	Endpoint = 'endpoint'
	Slope = 'slope'
	Flat = 'flat'
	Numeric = 'numeric'

class DeltaTerm:
	__slots__ = ('value',)
	
	value: float
	
	def __init__(self, value: float) -> None:
		self.value = value
	
	def __repr__(self) -> str:
		return 'DeltaTerm({!r})'.format(self.value)

class QuadraticLikelihood:
	__slots__ = ('a', 'b', 'c')
	
	a: float
	b: float
	c: float
	
	def __init__(self, a: float, b: float, c: float) -> None:
		self.a = a
		self.b = b
		self.c = c
	
	def __call__(self, alpha: float) -> float:
		return (self.a * alpha + self.b) * alpha + self.c
	
	def __repr__(self) -> str:
		return 'QuadraticLikelihood(a={!r}, b={!r}, c={!r})'.format(self.a, self.b, self.c)

class WeightEstimate:
	__slots__ = ('alpha_star', 'alpha_m', 'branch', 'window', 'value')
	
	alpha_star: float
	alpha_m: Optional[float]
	branch: Branch
	# First and last period of the observations used
	window: Tuple[int, int]
	# Likelihood at alpha_star
	value: float
	
	def __init__(self, alpha_star: float, alpha_m: Optional[float], branch: Branch, window: Tuple[int, int], value: float) -> None:
		assert 0.0 <= alpha_star <= 1.0
		self.alpha_star = alpha_star
		self.alpha_m = alpha_m
		self.branch = branch
		self.window = window
		self.value = value
	
	def __repr__(self) -> str:
		return 'WeightEstimate(alpha_star={!r}, alpha_m={!r}, branch={})'.format(self.alpha_star, self.alpha_m, self.branch.value)

class PeriodTerms:
	__slots__ = ('time', 'q_row', 'r_row', 'observed')
	
	time: int
	q_row: Distribution
	r_row: Distribution
	observed: int
	
	def __init__(self, time: int, q_row: Distribution, r_row: Distribution, observed: int) -> None:
		self.time = time
		self.q_row = q_row
		self.r_row = r_row
		self.observed = observed
	
	@property
	def q(self) -> float:
		return self.q_row[self.observed]
	
	@property
	def r(self) -> float:
		return self.r_row[self.observed]

def period_terms(model: CompiledModel, history: 'ObservationHistory', node: str, t: int) -> PeriodTerms:
	cpd = model.mixture(node)
	if t < model.node_lag[node]:
		raise error.IncompleteWindow("period {} of '{}' precedes its lagged context".format(t, node))
	
	def lookup(name: str, s: int) -> str:
		state = history.get(s, name)
		if state is None:
			raise error.IncompleteWindow("'{}' is not observed at {}, needed to update '{}' at {}".format(name, s, node, t))
		return state
	
	observed = model.variable(node).index(lookup(node, t))
	q_key = tuple(lookup(p, t) for p in cpd.q_parents)
	r_key = tuple(lookup(p, t - k) for p, k in cpd.r_parents)
	return PeriodTerms(t, cpd.q_table[q_key], cpd.r_table[r_key], observed)

def delta_term(q_prob_of_observed: float, r_prob_of_observed: float) -> DeltaTerm:
	return DeltaTerm(q_prob_of_observed - r_prob_of_observed)

def likelihood_coefficients(current: PeriodTerms, previous: PeriodTerms) -> QuadraticLikelihood:
	d_t = delta_term(current.q, current.r).value
	d_p = delta_term(previous.q, previous.r).value
	return QuadraticLikelihood(d_t * d_p, d_t * previous.r + d_p * current.r, previous.r * current.r)

def alpha_extremum(quad: QuadraticLikelihood) -> float:
	if quad.a == 0.0:
		raise error.NoExtremum("likelihood is linear in alpha; it has no extremum")
	return -quad.b / (2.0 * quad.a)

def _pick(candidates: Sequence[Tuple[float, float]], previous_alpha: float) -> Tuple[float, float]:
	best = max(v for _, v in candidates)
	winners = sorted(a for a, v in candidates if v >= best)
	if previous_alpha in winners:
		return previous_alpha, best
	return winners[0], best

def maximize_quadratic_on_unit(quad: QuadraticLikelihood, previous_alpha: float, *, window: Tuple[int, int] = (0, 0)) -> WeightEstimate:
	if quad.a == 0.0 and quad.b == 0.0:
		return WeightEstimate(previous_alpha, None, Branch.Flat, window, quad.c)
	
	alpha_m = None
	candidates = [(0.0, quad(0.0)), (1.0, quad(1.0)), (previous_alpha, quad(previous_alpha))]
	if quad.a != 0.0:
		alpha_m = alpha_extremum(quad)
		if quad.a < 0.0 and 0.0 <= alpha_m <= 1.0:
			candidates.append((alpha_m, quad(alpha_m)))
	
	alpha, value = _pick(candidates, previous_alpha)
	branch = Branch.Interior if alpha == alpha_m else Branch.Endpoint
	return WeightEstimate(alpha, alpha_m, branch, window, value)

def _maximize_linear(terms: PeriodTerms, previous_alpha: float) -> WeightEstimate:
	# One period: L(alpha) = R + alpha * delta
	delta = delta_term(terms.q, terms.r).value
	window = (terms.time, terms.time)
	if delta == 0.0:
		return WeightEstimate(previous_alpha, None, Branch.Flat, window, terms.r)
	alpha = 1.0 if delta > 0.0 else 0.0
	return WeightEstimate(alpha, None, Branch.Slope, window, terms.r + alpha * delta)

def observed_probability(terms: PeriodTerms, decomposition: Decomposition, alphas: np.ndarray) -> np.ndarray:
	if decomposition is Decomposition.Additive:
		return alphas * terms.q + (1.0 - alphas) * terms.r
	
	q = terms.q_row.probabilities[None, :]
	r = terms.r_row.probabilities[None, :]
	a = alphas[:, None]
	unnormalized = np.power(q, a) * np.power(r, 1.0 - a)
	total = unnormalized.sum(axis = 1)
	with np.errstate(divide = 'ignore', invalid = 'ignore'):
		p = np.where(total > 0.0, unnormalized[:, terms.observed] / total, 0.0)
	return p

def log_likelihood(periods: Sequence[PeriodTerms], decomposition: Decomposition, alphas: np.ndarray) -> np.ndarray:
	total = np.zeros_like(alphas)
	with np.errstate(divide = 'ignore'):
		for terms in periods:
			total += np.log(observed_probability(terms, decomposition, alphas))
	return total

def maximize_numeric(periods: Sequence[PeriodTerms], decomposition: Decomposition, previous_alpha: float) -> WeightEstimate:
	import settings
	
	window = (periods[0].time, periods[-1].time)
	grid = np.linspace(0.0, 1.0, settings.GRID_POINTS)
	values = log_likelihood(periods, decomposition, grid)
	prev = float(log_likelihood(periods, decomposition, np.array([previous_alpha]))[0])
	best = int(np.argmax(values))
	
	if not np.isfinite(values[best]) or values.max() == values.min():
		return WeightEstimate(previous_alpha, None, Branch.Flat, window, float(np.exp(prev)))
	
	candidates = [(float(grid[best]), float(values[best])), (previous_alpha, prev)]
	# The log-likelihood is concave in alpha, so the grid neighbours bracket the maximum
	lo = grid[max(best - 1, 0)]
	hi = grid[min(best + 1, grid.size - 1)]
	refined = minimize_scalar(
		lambda a: -float(log_likelihood(periods, decomposition, np.array([a]))[0]),
		bounds = (lo, hi), method = 'bounded', options = { 'xatol': settings.REFINE_TOL },
	)
	if refined.success and np.isfinite(refined.fun):
		candidates.append((float(refined.x), float(-refined.fun)))
	
	alpha, value = _pick(candidates, previous_alpha)
	return WeightEstimate(alpha, None, Branch.Numeric, window, float(np.exp(value)))

def mle_alpha_window(model: CompiledModel, history: 'ObservationHistory', node: str, window: int, previous_alpha: float, *, t: Optional[int] = None) -> WeightEstimate:
	if window < 1:
		raise error.IncompleteWindow("estimation window must be at least 1, got {}".format(window))
	cpd = model.mixture(node)
	last = history.time if t is None else t
	periods = [period_terms(model, history, node, s) for s in range(last - window + 1, last + 1)]
	
	if cpd.decomposition is Decomposition.Additive and window == 1:
		estimate = _maximize_linear(periods[0], previous_alpha)
	elif cpd.decomposition is Decomposition.Additive and window == 2:
		quad = likelihood_coefficients(periods[1], periods[0])
		estimate = maximize_quadratic_on_unit(quad, previous_alpha, window = (periods[0].time, last))
	else:
		estimate = maximize_numeric(periods, cpd.decomposition, previous_alpha)
	
	_logger.info('update', node, 'window', estimate.window, estimate.branch.value, 'alpha*', estimate.alpha_star)
	return estimate

_logger = Logger('estimation', mle_alpha_window, gate = 'DEBUG_ESTIMATION')
