from typing import Dict, List, Tuple, Sequence, Mapping, Optional, Union, FrozenSet, Iterable
from enum import Enum
import itertools
import numpy as np

from . import error
from .models import Variable, Distribution, TabularCPD, NetworkStructure, ValidationReport, RowKey
from .network import BeliefNetwork, validate_structure

class Decomposition(Enum):
	Additive = 'additive'
	Multiplicative = 'multiplicative'

# (variable, lag); lag 0 is the same slice
Parent = Tuple[str, int]

class LaggedArc:
	__slots__ = ('source', 'lag', 'target')
	
	source: str
	lag: int
	target: str
	
	def __init__(self, source: str, lag: int, target: str) -> None:
		self.source = source
		self.lag = lag
		self.target = target
	
	def __repr__(self) -> str:
		return 'LaggedArc({!r}, {}, {!r})'.format(self.source, self.lag, self.target)

class SliceTemplate:
	__slots__ = ('variables', 'contemporaneous_arcs')
	
	variables: List[Variable]
	contemporaneous_arcs: List[Tuple[str, str]]
	
	def __init__(self, variables: Sequence[Variable], contemporaneous_arcs: Iterable[Tuple[str, str]]) -> None:
		self.variables = list(variables)
		self.contemporaneous_arcs = [(a, b) for a, b in contemporaneous_arcs]

class TableCPD:
	__slots__ = ('target', 'parents', 'rows')
	
	target: str
	parents: Tuple[Parent, ...]
	rows: Dict[RowKey, Distribution]
	
	def __init__(self, target: str, parents: Sequence[Parent], rows: Mapping[RowKey, Distribution]) -> None:
		self.target = target
		self.parents = tuple((p, int(k)) for p, k in parents)
		self.rows = dict(rows)
	
	@property
	def node_lag(self) -> int:
		return max((k for _, k in self.parents), default = 0)

class MixtureCPD:
	__slots__ = ('target', 'q_parents', 'q_table', 'r_parents', 'r_table', 'decomposition', 'alpha')
	
	target: str
	q_parents: Tuple[str, ...]
	q_table: Dict[RowKey, Distribution]
	r_parents: Tuple[Parent, ...]
	r_table: Dict[RowKey, Distribution]
	decomposition: Decomposition
	# Weight of the contemporaneous table Q; 1 - alpha weighs the lagged table R
	alpha: float
	
	def __init__(self, target: str, q_parents: Sequence[str], q_table: Mapping[RowKey, Distribution], r_parents: Sequence[Parent], r_table: Mapping[RowKey, Distribution], *, decomposition: Decomposition = Decomposition.Additive, alpha: float = 0.5) -> None:
		self.target = target
		self.q_parents = tuple(q_parents)
		self.q_table = dict(q_table)
		self.r_parents = tuple((p, int(k)) for p, k in r_parents)
		self.r_table = dict(r_table)
		self.decomposition = decomposition
		self.alpha = alpha
	
	@property
	def parents(self) -> Tuple[Parent, ...]:
		return tuple((q, 0) for q in self.q_parents) + self.r_parents
	
	@property
	def node_lag(self) -> int:
		return max((k for _, k in self.r_parents), default = 0)

NodeCPD = Union[TableCPD, MixtureCPD]

class InitialSlice:
	__slots__ = ('observed', 'cpd')
	
	observed: bool
	cpd: Optional[TableCPD]
	
	@classmethod
	def Observed(cls) -> 'InitialSlice':
		return InitialSlice(True, None)
	
	@classmethod
	def Table(cls, cpd: TableCPD) -> 'InitialSlice':
		return InitialSlice(False, cpd)
	
	def __init__(self, observed: bool, cpd: Optional[TableCPD]) -> None:
		assert observed == (cpd is None)
		self.observed = observed
		self.cpd = cpd

class DnmSpec:
	__slots__ = ('template', 'lagged_arcs', 'cpds', 'initial_slices')
	
	template: SliceTemplate
	lagged_arcs: List[LaggedArc]
	cpds: Dict[str, NodeCPD]
	initial_slices: Dict[str, InitialSlice]
	
	def __init__(self, template: SliceTemplate, lagged_arcs: Sequence[LaggedArc], cpds: Mapping[str, NodeCPD], initial_slices: Optional[Mapping[str, InitialSlice]] = None) -> None:
		self.template = template
		self.lagged_arcs = list(lagged_arcs)
		self.cpds = dict(cpds)
		self.initial_slices = dict(initial_slices or {})

class CompiledModel:
	__slots__ = ('spec', 'variables', 'max_lag', 'node_lag', 'mixture_nodes', '_by_name')
	
	spec: DnmSpec
	variables: List[Variable]
	max_lag: int
	node_lag: Dict[str, int]
	mixture_nodes: List[str]
	_by_name: Dict[str, Variable]
	
	def __init__(self, spec: DnmSpec) -> None:
		self.spec = spec
		self.variables = list(spec.template.variables)
		self._by_name = { v.name: v for v in self.variables }
		self.max_lag = max((a.lag for a in spec.lagged_arcs), default = 0)
		self.node_lag = { name: cpd.node_lag for name, cpd in spec.cpds.items() }
		self.mixture_nodes = [
			v.name for v in self.variables if isinstance(spec.cpds[v.name], MixtureCPD)
		]
	
	@property
	def names(self) -> List[str]:
		return [v.name for v in self.variables]
	
	def variable(self, name: str) -> Variable:
		v = self._by_name.get(name)
		if v is None:
			raise error.UnknownVariable("'{}' is not a model variable".format(name))
		return v
	
	def cpd(self, name: str) -> NodeCPD:
		return self.spec.cpds[name]
	
	def mixture(self, name: str) -> MixtureCPD:
		cpd = self.spec.cpds.get(name)
		if not isinstance(cpd, MixtureCPD):
			raise error.UnknownVariable("'{}' has no mixture CPD".format(name))
		return cpd
	
	def alpha_init(self) -> Dict[str, float]:
		return { name: self.mixture(name).alpha for name in self.mixture_nodes }

def compile(spec: DnmSpec) -> CompiledModel:
	report = ValidationReport()
	template = spec.template
	by_name = { v.name: v for v in template.variables }
	
	contemporaneous: Dict[str, List[str]] = { v.name: [] for v in template.variables }
	for a, b in template.contemporaneous_arcs:
		contemporaneous.setdefault(b, []).append(a)
	report.extend(validate_structure(NetworkStructure(template.variables, contemporaneous)))
	
	declared: Dict[str, List[Parent]] = {
		name: [(p, 0) for p in ps] for name, ps in contemporaneous.items()
	}
	for arc in spec.lagged_arcs:
		location = "lagged arc {} -[{}]-> {}".format(arc.source, arc.lag, arc.target)
		if not isinstance(arc.lag, int) or arc.lag < 1:
			report.add('bad-lag', location, "lag must be an integer >= 1")
			continue
		if arc.source not in by_name or arc.target not in by_name:
			report.add('unresolved', location, "endpoint is not a template variable")
			continue
		if (arc.source, arc.lag) in declared[arc.target]:
			report.add('duplicate-arc', location, "arc is declared twice")
			continue
		declared[arc.target].append((arc.source, arc.lag))
	
	for name in spec.cpds:
		if name not in by_name:
			report.add('unresolved', "CPD of '{}'".format(name), "not a template variable")
	for v in template.variables:
		cpd = spec.cpds.get(v.name)
		if cpd is None:
			report.add('missing-cpd', "variable '{}'".format(v.name), "no conditional distribution")
			continue
		_check_cpd(report, by_name, v, cpd, declared.get(v.name, []))
		if cpd.node_lag > 0:
			provision = spec.initial_slices.get(v.name)
			if provision is None:
				report.add('missing-initial', "variable '{}'".format(v.name), "lagged parents need an initial-slice provision")
			elif provision.cpd is not None:
				_check_initial(report, by_name, v, provision.cpd, contemporaneous.get(v.name, []))
		elif v.name in spec.initial_slices:
			report.add('unused-initial', "variable '{}'".format(v.name), "initial provision given for a node without lagged parents")
	
	if not report.ok:
		raise error.CompileError(report.violations)
	return CompiledModel(spec)

def _check_cpd(report: ValidationReport, by_name: Dict[str, Variable], target: Variable, cpd: NodeCPD, declared: List[Parent]) -> None:
	location = "CPD of '{}'".format(target.name)
	if cpd.target != target.name:
		report.add('cpd-target', location, "CPD is declared for '{}'".format(cpd.target))
		return
	
	used = list(cpd.parents)
	if isinstance(cpd, MixtureCPD):
		for p, k in cpd.r_parents:
			if k < 1:
				report.add('parent-mismatch', location, "R parent ({}, {}) must be lagged".format(p, k))
	for p, k in used:
		if (p, k) not in declared:
			report.add('parent-mismatch', location, "parent ({}, {}) has no matching declared arc".format(p, k))
	for p, k in declared:
		if (p, k) not in used:
			report.add('parent-mismatch', location, "declared arc from ({}, {}) is not used by the CPD".format(p, k))
	if len(set(used)) != len(used):
		report.add('duplicate-parent', location, "parent list contains duplicates")
	if any(p not in by_name for p, _ in used):
		return
	
	if isinstance(cpd, MixtureCPD):
		_check_rows(report, location + ' Q', [by_name[p] for p in cpd.q_parents], target, cpd.q_table)
		_check_rows(report, location + ' R', [by_name[p] for p, _ in cpd.r_parents], target, cpd.r_table)
		if not 0.0 <= cpd.alpha <= 1.0:
			report.add('bad-alpha', location, "alpha {!r} is outside [0, 1]".format(cpd.alpha))
	else:
		_check_rows(report, location, [by_name[p] for p, _ in cpd.parents], target, cpd.rows)

def _check_initial(report: ValidationReport, by_name: Dict[str, Variable], target: Variable, cpd: TableCPD, contemporaneous: List[str]) -> None:
	location = "initial CPD of '{}'".format(target.name)
	for p, k in cpd.parents:
		if k != 0 or p not in contemporaneous:
			report.add('parent-mismatch', location, "parent ({}, {}) is not a contemporaneous arc".format(p, k))
			return
	_check_rows(report, location, [by_name[p] for p, _ in cpd.parents], target, cpd.rows)

def _check_rows(report: ValidationReport, location: str, parents: List[Variable], target: Variable, rows: Mapping[RowKey, Distribution]) -> None:
	expected = set(itertools.product(*(p.states for p in parents)))
	for key in rows:
		if key not in expected:
			report.add('bad-row', location, "row ({}) does not match the parent states".format(','.join(key)))
	for key in sorted(expected):
		row = rows.get(key)
		if row is None:
			report.add('missing-row', location, "no row for parent states ({})".format(','.join(key)))
		elif len(row) != target.cardinality:
			report.add('bad-row', location, "row ({}) has {} entries for {} states".format(','.join(key), len(row), target.cardinality))

class MixtureEvalResult:
	__slots__ = ('distribution', 'normalizer')
	
	distribution: Distribution
	normalizer: float
	
	def __init__(self, distribution: Distribution, normalizer: float) -> None:
		self.distribution = distribution
		self.normalizer = normalizer

def _check_alpha(alpha: float) -> None:
	if not 0.0 <= alpha <= 1.0:
		raise error.InvalidAlpha("alpha {!r} is outside [0, 1]".format(alpha))

def mixture_eval_additive(q_row: Distribution, r_row: Distribution, alpha: float) -> MixtureEvalResult:
	_check_alpha(alpha)
	p = alpha * q_row.probabilities + (1.0 - alpha) * r_row.probabilities
	return MixtureEvalResult(Distribution(p), 1.0)

def mixture_eval_multiplicative(q_row: Distribution, r_row: Distribution, alpha: float) -> MixtureEvalResult:
	_check_alpha(alpha)
	# At the endpoints the mixture is the component itself
	if alpha == 0.0:
		return MixtureEvalResult(r_row, 1.0 / r_row.probabilities.sum())
	if alpha == 1.0:
		return MixtureEvalResult(q_row, 1.0 / q_row.probabilities.sum())
	# numpy keeps 0 ** 0 == 1
	unnormalized = np.power(q_row.probabilities, alpha) * np.power(r_row.probabilities, 1.0 - alpha)
	total = unnormalized.sum()
	if total <= 0.0:
		raise error.DegenerateMixture("Q and R rows have disjoint support; the product has nothing to normalize")
	return MixtureEvalResult(Distribution(unnormalized / total), 1.0 / total)

def mixture_eval(decomposition: Decomposition, q_row: Distribution, r_row: Distribution, alpha: float) -> MixtureEvalResult:
	if decomposition is Decomposition.Multiplicative:
		return mixture_eval_multiplicative(q_row, r_row, alpha)
	return mixture_eval_additive(q_row, r_row, alpha)

def materialize(model: CompiledModel, cpd: MixtureCPD, alpha: float) -> Dict[RowKey, Distribution]:
	q_states = [model.variable(p).states for p in cpd.q_parents]
	r_states = [model.variable(p).states for p, _ in cpd.r_parents]
	rows = {}
	for q_key in itertools.product(*q_states):
		for r_key in itertools.product(*r_states):
			rows[q_key + r_key] = mixture_eval(cpd.decomposition, cpd.q_table[q_key], cpd.r_table[r_key], alpha).distribution
	return rows

def resolve_alphas(model: CompiledModel, alphas: Optional[Mapping[str, float]] = None) -> Dict[str, float]:
	resolved = model.alpha_init()
	for name, alpha in (alphas or {}).items():
		model.mixture(name)
		_check_alpha(alpha)
		resolved[name] = alpha
	return resolved

def node_name(name: str, s: int) -> str:
	return '{}@{}'.format(name, s)

class SliceWindow:
	__slots__ = ('model', 'first', 'last', 'context', 'alphas')
	
	model: CompiledModel
	first: int
	last: int
	# Leading slices that only supply observed lagged context
	context: int
	alphas: Dict[str, float]
	
	def __init__(self, model: CompiledModel, first: int, last: int, *, context: int = 0, alphas: Optional[Mapping[str, float]] = None) -> None:
		if first < 0 or last < first - 1:
			raise error.InsufficientSlices("window [{}, {}] is empty or negative".format(first, last))
		self.model = model
		self.first = first
		self.last = last
		self.context = context
		self.alphas = resolve_alphas(model, alphas)
	
	def slices(self) -> range:
		return range(self.first, self.last + 1)

class GroundNetwork:
	__slots__ = ('network', 'window', 'required')
	
	network: BeliefNetwork
	window: SliceWindow
	# Nodes that stand in for observations and must be given as evidence
	required: FrozenSet[str]
	
	def __init__(self, network: BeliefNetwork, window: SliceWindow, required: FrozenSet[str]) -> None:
		self.network = network
		self.window = window
		self.required = required

def scroll(window: SliceWindow) -> SliceWindow:
	return SliceWindow(window.model, window.first, window.last + 1, context = window.context, alphas = window.alphas)

def unroll(model: CompiledModel, T: int, *, alphas: Optional[Mapping[str, float]] = None) -> GroundNetwork:
	if T < 0:
		raise error.InsufficientSlices("cannot unroll to slice {}".format(T))
	return ground(SliceWindow(model, 0, T, alphas = alphas))

def ground(window: SliceWindow) -> GroundNetwork:
	model = window.model
	if window.last < window.first:
		raise error.InsufficientSlices("window [{}, {}] has no slices".format(window.first, window.last))
	
	materialized = {
		name: materialize(model, model.mixture(name), window.alphas[name])
		for name in model.mixture_nodes
	}
	variables = []
	cpds = {}
	required = set()
	for s in window.slices():
		for v in model.variables:
			name = node_name(v.name, s)
			variables.append(v.renamed(name))
			if s < window.first + window.context:
				cpds[name] = _placeholder(name, v)
				required.add(name)
				continue
			
			lag = model.node_lag[v.name]
			if s - lag < 0:
				provision = model.spec.initial_slices[v.name]
				if provision.cpd is None:
					cpds[name] = _placeholder(name, v)
					required.add(name)
				else:
					cpds[name] = _grounded(name, s, provision.cpd.parents, provision.cpd.rows)
				continue
			if s - lag < window.first:
				raise error.InsufficientSlices("'{}' at slice {} needs slice {}, before the window".format(v.name, s, s - lag))
			
			cpd = model.cpd(v.name)
			if isinstance(cpd, MixtureCPD):
				cpds[name] = _grounded(name, s, cpd.parents, materialized[v.name])
			else:
				cpds[name] = _grounded(name, s, cpd.parents, cpd.rows)
	
	return GroundNetwork(BeliefNetwork(variables, cpds), window, frozenset(required))

def _placeholder(name: str, v: Variable) -> TabularCPD:
	return TabularCPD(name, (), { (): Distribution.Uniform(v.cardinality) })

def _grounded(name: str, s: int, parents: Sequence[Parent], rows: Dict[RowKey, Distribution]) -> TabularCPD:
	return TabularCPD(name, [node_name(p, s - k) for p, k in parents], rows)
