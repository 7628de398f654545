from typing import Dict, List, Tuple, Sequence, Mapping, Iterator, Any, Optional
import numpy as np

from . import error

class Variable:
	__slots__ = ('name', 'states', '_index', '_hash')
	
	name: str
	states: Tuple[str, ...]
	_index: Dict[str, int]
	_hash: int
	
	def __init__(self, name: str, states: Sequence[str]) -> None:
		states = tuple(states)
		if len(states) < 2:
			raise error.ModelError("variable '{}' needs at least two states".format(name))
		if len(set(states)) != len(states):
			raise error.ModelError("variable '{}' has duplicate state labels".format(name))
		self.name = name
		self.states = states
		self._index = { s: i for i, s in enumerate(states) }
		self._hash = hash((name, states))
	
	def __setattr__(self, attr: str, value: Any) -> None:
		if getattr(self, '_hash', None) is None:
			super().__setattr__(attr, value)
			return
		raise AttributeError("Immutable")
	
	def __eq__(self, other: Any) -> bool:
		if not isinstance(other, Variable):
			return False
		return self.name == other.name and self.states == other.states
	
	def __hash__(self) -> int:
		return self._hash
	
	def __repr__(self) -> str:
		return 'Variable({!r}, {!r})'.format(self.name, self.states)
	
	@property
	def cardinality(self) -> int:
		return len(self.states)
	
	def index(self, state: str) -> int:
		idx = self._index.get(state)
		if idx is None:
			raise error.InvalidState("'{}' is not a state of '{}' (states: {})".format(state, self.name, ','.join(self.states)))
		return idx
	
	def renamed(self, name: str) -> 'Variable':
		return Variable(name, self.states)

class Distribution:
	__slots__ = ('probabilities',)
	
	probabilities: np.ndarray
	
	@classmethod
	def PointMass(cls, index: int, size: int) -> 'Distribution':
		p = np.zeros(size)
		p[index] = 1.0
		return Distribution(p)
	
	@classmethod
	def Uniform(cls, size: int) -> 'Distribution':
		return Distribution(np.full(size, 1.0 / size))
	
	def __init__(self, probabilities: Sequence[float]) -> None:
		import settings
		p = np.array(probabilities, dtype = np.float64)
		if p.ndim != 1 or p.size < 1:
			raise error.ModelError("distribution must be a non-empty vector")
		if not np.all(np.isfinite(p)) or np.any(p < 0):
			raise error.ModelError("distribution has negative or non-finite entries: {}".format(p.tolist()))
		if abs(p.sum() - 1.0) > settings.DISTRIBUTION_TOL:
			raise error.ModelError("distribution sums to {!r}, not 1".format(float(p.sum())))
		p.setflags(write = False)
		self.probabilities = p
	
	def __len__(self) -> int:
		return self.probabilities.size
	
	def __getitem__(self, index: int) -> float:
		return float(self.probabilities[index])
	
	def __iter__(self) -> Iterator[float]:
		return iter(self.probabilities.tolist())
	
	def __repr__(self) -> str:
		return 'Distribution({!r})'.format(self.probabilities.tolist())

# Rows of a CPD are keyed by the parent states, in parent order
RowKey = Tuple[str, ...]

class TabularCPD:
	__slots__ = ('target', 'parent_order', 'rows')
	
	target: str
	parent_order: Tuple[str, ...]
	rows: Dict[RowKey, Distribution]
	
	def __init__(self, target: str, parent_order: Sequence[str], rows: Mapping[RowKey, Distribution]) -> None:
		self.target = target
		self.parent_order = tuple(parent_order)
		self.rows = dict(rows)

class NetworkStructure:
	__slots__ = ('variables', 'parents')
	
	variables: List[Variable]
	parents: Dict[str, List[str]]
	
	def __init__(self, variables: Sequence[Variable], parents: Optional[Mapping[str, Sequence[str]]] = None) -> None:
		self.variables = list(variables)
		self.parents = { v.name: [] for v in self.variables }
		for name, ps in (parents or {}).items():
			self.parents[name] = list(ps)

class Evidence:
	__slots__ = ('assignments',)
	
	assignments: Dict[str, str]
	
	def __init__(self, assignments: Optional[Mapping[str, str]] = None) -> None:
		self.assignments = dict(assignments or {})
	
	def __contains__(self, name: str) -> bool:
		return name in self.assignments
	
	def __len__(self) -> int:
		return len(self.assignments)
	
	def get(self, name: str) -> Optional[str]:
		return self.assignments.get(name)
	
	def items(self) -> Iterator[Tuple[str, str]]:
		return iter(self.assignments.items())

class Violation:
	__slots__ = ('kind', 'location', 'message')
	
	kind: str
	location: str
	message: str
	
	def __init__(self, kind: str, location: str, message: str) -> None:
		self.kind = kind
		self.location = location
		self.message = message
	
	def __str__(self) -> str:
		return '{}: {} ({})'.format(self.location, self.message, self.kind)
	
	def __repr__(self) -> str:
		return 'Violation({!r}, {!r}, {!r})'.format(self.kind, self.location, self.message)

class ValidationReport:
	__slots__ = ('violations',)
	
	violations: List[Violation]
	
	def __init__(self, violations: Optional[List[Violation]] = None) -> None:
		self.violations = violations or []
	
	@property
	def ok(self) -> bool:
		return not self.violations
	
	def add(self, kind: str, location: str, message: str) -> None:
		self.violations.append(Violation(kind, location, message))
	
	def extend(self, other: 'ValidationReport') -> None:
		self.violations.extend(other.violations)
	
	def kinds(self) -> List[str]:
		return [v.kind for v in self.violations]
