from typing import Dict, List, Tuple, Sequence, Mapping, Iterator, Set, Optional
import itertools
import numpy as np
import networkx as nx

from util.misc import Logger

from . import error
from .models import Variable, Distribution, TabularCPD, NetworkStructure, Evidence, ValidationReport

def validate_structure(structure: NetworkStructure) -> ValidationReport:
	report = ValidationReport()
	
	names: Set[str] = set()
	for v in structure.variables:
		if v.name in names:
			report.add('duplicate-name', "variable '{}'".format(v.name), "name is used by more than one variable")
		names.add(v.name)
	
	graph = nx.DiGraph()
	graph.add_nodes_from(sorted(names))
	for target, parents in structure.parents.items():
		location = "parents of '{}'".format(target)
		if target not in names:
			report.add('unresolved', location, "'{}' is not a network variable".format(target))
			continue
		if len(set(parents)) != len(parents):
			report.add('duplicate-parent', location, "parent list contains duplicates")
		for p in parents:
			if p not in names:
				report.add('unresolved', location, "parent '{}' is not a network variable".format(p))
				continue
			graph.add_edge(p, target)
	
	for cycle in _cycles(graph):
		report.add('cycle', 'cycle {{{}}}'.format(','.join(cycle)), "arcs form a directed cycle")
	
	return report

def _cycles(graph: nx.DiGraph) -> List[List[str]]:
	# One cycle per strongly connected component is enough to locate every violation
	cycles = []
	for component in nx.strongly_connected_components(graph):
		if len(component) == 1:
			(node,) = component
			if not graph.has_edge(node, node):
				continue
		cycles.append(sorted(component))
	return sorted(cycles)

class BeliefNetwork:
	__slots__ = ('structure', 'cpds', '_variables', '_tables', '_graph')
	
	structure: NetworkStructure
	cpds: Dict[str, TabularCPD]
	_variables: Dict[str, Variable]
	# CPD values as arrays shaped (parent cardinalities..., target cardinality)
	_tables: Dict[str, np.ndarray]
	_graph: nx.DiGraph
	
	def __init__(self, variables: Sequence[Variable], cpds: Mapping[str, TabularCPD]) -> None:
		structure = NetworkStructure(variables, {
			name: cpd.parent_order for name, cpd in cpds.items()
		})
		report = validate_structure(structure)
		self._variables = { v.name: v for v in structure.variables }
		
		for v in structure.variables:
			cpd = cpds.get(v.name)
			if cpd is None:
				report.add('missing-cpd', "variable '{}'".format(v.name), "no conditional distribution")
				continue
			if cpd.target != v.name:
				report.add('cpd-target', "variable '{}'".format(v.name), "CPD is declared for '{}'".format(cpd.target))
		if not report.ok:
			raise error.CompileError(report.violations)
		
		self._tables = {}
		for name, cpd in cpds.items():
			self._tables[name] = _cpd_table(self._variables, cpd, report)
		if not report.ok:
			raise error.CompileError(report.violations)
		
		self.structure = structure
		self.cpds = dict(cpds)
		self._graph = nx.DiGraph()
		self._graph.add_nodes_from(v.name for v in structure.variables)
		for name, cpd in self.cpds.items():
			self._graph.add_edges_from((p, name) for p in cpd.parent_order)
	
	@property
	def variables(self) -> List[Variable]:
		return self.structure.variables
	
	def variable(self, name: str) -> Variable:
		v = self._variables.get(name)
		if v is None:
			raise error.UnknownVariable("'{}' is not a network variable".format(name))
		return v
	
	def parents(self, name: str) -> Tuple[str, ...]:
		return self.cpds[name].parent_order
	
	def table(self, name: str) -> np.ndarray:
		return self._tables[name]
	
	def factor(self, name: str) -> 'Factor':
		return Factor(self.cpds[name].parent_order + (name,), self._tables[name])
	
	def topological_order(self) -> List[str]:
		return list(nx.lexicographical_topological_sort(self._graph))
	
	def ancestors(self, names: Set[str]) -> Set[str]:
		result = set(names)
		for name in names:
			result |= nx.ancestors(self._graph, name)
		return result

def _cpd_table(variables: Dict[str, Variable], cpd: TabularCPD, report: ValidationReport) -> np.ndarray:
	target = variables[cpd.target]
	parents = [variables[p] for p in cpd.parent_order]
	location = "CPD of '{}'".format(cpd.target)
	table = np.zeros(tuple(p.cardinality for p in parents) + (target.cardinality,))
	
	expected = set(itertools.product(*(p.states for p in parents)))
	for key in cpd.rows:
		if key not in expected:
			report.add('bad-row', location, "row {} does not match the parent states".format(','.join(key)))
	for key in sorted(expected):
		row = cpd.rows.get(key)
		if row is None:
			report.add('missing-row', location, "no row for parent states ({})".format(','.join(key)))
			continue
		if len(row) != target.cardinality:
			report.add('bad-row', location, "row ({}) has {} entries for {} states".format(','.join(key), len(row), target.cardinality))
			continue
		idx = tuple(p.index(s) for p, s in zip(parents, key))
		table[idx] = row.probabilities
	table.setflags(write = False)
	return table

class Factor:
	__slots__ = ('scope', 'values')
	
	scope: Tuple[str, ...]
	values: np.ndarray
	
	def __init__(self, scope: Tuple[str, ...], values: np.ndarray) -> None:
		assert len(scope) == values.ndim
		self.scope = scope
		self.values = values
	
	def __mul__(self, other: 'Factor') -> 'Factor':
		scope = self.scope + tuple(v for v in other.scope if v not in self.scope)
		return Factor(scope, self._aligned(scope) * other._aligned(scope))
	
	def _aligned(self, scope: Tuple[str, ...]) -> np.ndarray:
		order = [self.scope.index(v) for v in scope if v in self.scope]
		shape = [self.values.shape[self.scope.index(v)] if v in self.scope else 1 for v in scope]
		return np.transpose(self.values, order).reshape(shape)
	
	def marginalize(self, name: str) -> 'Factor':
		axis = self.scope.index(name)
		return Factor(self.scope[:axis] + self.scope[axis + 1:], self.values.sum(axis = axis))
	
	def reduce(self, name: str, index: int) -> 'Factor':
		if name not in self.scope:
			return self
		axis = self.scope.index(name)
		return Factor(self.scope[:axis] + self.scope[axis + 1:], np.take(self.values, index, axis = axis))

def _check_evidence(network: BeliefNetwork, evidence: Evidence, query: str) -> Dict[str, int]:
	network.variable(query)
	return {
		name: network.variable(name).index(state)
		for name, state in evidence.items()
	}

def _normalized(values: np.ndarray) -> Distribution:
	total = values.sum()
	if not total > 0:
		raise error.InconsistentEvidence("evidence has zero probability under the network")
	return Distribution(values / total)

def posterior_enumerate(network: BeliefNetwork, evidence: Evidence, query: str) -> Distribution:
	observed = _check_evidence(network, evidence, query)
	names = [v.name for v in network.variables]
	free = [n for n in names if n not in observed]
	q = network.variable(query)
	
	weights = np.zeros(q.cardinality)
	assignment = dict(observed)
	for combo in itertools.product(*(range(network.variable(n).cardinality) for n in free)):
		assignment.update(zip(free, combo))
		p = 1.0
		for n in names:
			idx = tuple(assignment[x] for x in network.parents(n)) + (assignment[n],)
			p *= network.table(n)[idx]
			if p == 0.0:
				break
		weights[assignment[query]] += p
	return _normalized(weights)

def posterior_eliminate(network: BeliefNetwork, evidence: Evidence, query: str) -> Distribution:
	observed = _check_evidence(network, evidence, query)
	
	# Unobserved nodes with no observed or queried descendant sum out to 1
	relevant = network.ancestors(set(observed) | { query })
	
	factors: List[Factor] = []
	for name in sorted(relevant):
		f = network.factor(name)
		for e, idx in observed.items():
			if e != query:
				f = f.reduce(e, idx)
		factors.append(f)
	if query in observed:
		q = network.variable(query)
		factors.append(Factor((query,), Distribution.PointMass(observed[query], q.cardinality).probabilities))
	
	order = _min_degree_order(factors, keep = query)
	_logger.info('eliminate', query, 'order', order)
	for name in order:
		touching = [f for f in factors if name in f.scope]
		if not touching:
			continue
		product = touching[0]
		for f in touching[1:]:
			product = product * f
		factors = [f for f in factors if name not in f.scope]
		factors.append(product.marginalize(name))
	
	result = Factor((query,), np.ones(network.variable(query).cardinality))
	for f in factors:
		result = result * f
	return _normalized(result.values)

def _min_degree_order(factors: List[Factor], *, keep: str) -> List[str]:
	graph = nx.Graph()
	for f in factors:
		graph.add_nodes_from(f.scope)
		graph.add_edges_from(itertools.combinations(f.scope, 2))
	if keep in graph:
		graph.remove_node(keep)
	
	order = []
	while graph.number_of_nodes():
		name = min(graph.nodes, key = lambda n: (graph.degree(n), n))
		neighbours = list(graph.neighbors(name))
		graph.add_edges_from(itertools.combinations(neighbours, 2))
		graph.remove_node(name)
		order.append(name)
	return order

class SampleBatch:
	__slots__ = ('variables', 'indices')
	
	variables: List[Variable]
	# One row per sample, one column per variable, holding state indices
	indices: np.ndarray
	
	def __init__(self, variables: List[Variable], indices: np.ndarray) -> None:
		self.variables = variables
		self.indices = indices
	
	def __len__(self) -> int:
		return self.indices.shape[0]
	
	def __getitem__(self, i: int) -> Dict[str, str]:
		return {
			v.name: v.states[self.indices[i, j]]
			for j, v in enumerate(self.variables)
		}
	
	def __iter__(self) -> Iterator[Dict[str, str]]:
		for i in range(len(self)):
			yield self[i]
	
	def column(self, name: str) -> np.ndarray:
		for j, v in enumerate(self.variables):
			if v.name == name:
				return self.indices[:, j]
		raise error.UnknownVariable("'{}' is not a sampled variable".format(name))
	
	def frequency(self, name: str, state: str) -> float:
		for v in self.variables:
			if v.name == name:
				return float(np.mean(self.column(name) == v.index(state)))
		raise error.UnknownVariable("'{}' is not a sampled variable".format(name))

def forward_sample(network: BeliefNetwork, seed: int, n: int) -> SampleBatch:
	if n < 1:
		raise error.ModelError("sample count must be at least 1, got {}".format(n))
	rng = np.random.default_rng(seed)
	variables = network.variables
	column = { v.name: j for j, v in enumerate(variables) }
	indices = np.zeros((n, len(variables)), dtype = np.int64)
	
	for name in network.topological_order():
		table = network.table(name)
		card = table.shape[-1]
		rows = table.reshape(-1, card)
		flat = np.zeros(n, dtype = np.int64)
		for p in network.parents(name):
			flat = flat * network.variable(p).cardinality + indices[:, column[p]]
		cumulative = np.cumsum(rows, axis = 1)[flat]
		u = rng.random(n)
		drawn = (u[:, None] >= cumulative).sum(axis = 1)
		indices[:, column[name]] = np.minimum(drawn, card - 1)
	
	return SampleBatch(list(variables), indices)

_logger = Logger('inference', posterior_eliminate, gate = 'DEBUG_INFERENCE')
