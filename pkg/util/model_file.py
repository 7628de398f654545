from typing import Any, Dict, List, Mapping, Tuple
import json

from core import error
from core.models import Variable, Distribution, RowKey
from core.dnm import (
	DnmSpec, SliceTemplate, LaggedArc, TableCPD, MixtureCPD, InitialSlice, Decomposition, NodeCPD, Parent,
)

def load_model(path: str) -> DnmSpec:
	try:
		with open(path, 'r', encoding = 'utf-8') as fh:
			text = fh.read()
	except OSError as ex:
		raise error.FormatError("cannot read model file {}: {}".format(path, ex)) from ex
	return parse_model(text)

def parse_model(text: str) -> DnmSpec:
	try:
		doc = json.loads(text)
	except ValueError as ex:
		raise error.FormatError("model file is not valid JSON: {}".format(ex)) from ex
	try:
		return _spec(doc)
	except (KeyError, TypeError, ValueError, AttributeError) as ex:
		raise error.FormatError("model file is malformed: {!r}".format(ex)) from ex

def _spec(doc: Dict[str, Any]) -> DnmSpec:
	variables = [Variable(v['name'], v['states']) for v in doc['variables']]
	arcs = [(a, b) for a, b in doc.get('contemporaneous_arcs', [])]
	lagged = [LaggedArc(a['from'], _lag(a['lag']), a['to']) for a in doc.get('lagged_arcs', [])]
	cpds: Dict[str, NodeCPD] = {}
	for name, c in doc['cpds'].items():
		if c.get('type', 'tabular') == 'mixture':
			cpds[name] = MixtureCPD(
				name,
				[str(p) for p in c['q_parents']], _rows(c['q_table']),
				[_parent(p) for p in c['r_parents']], _rows(c['r_table']),
				decomposition = Decomposition(c.get('decomposition', 'additive')),
				alpha = float(c.get('alpha_init', 0.5)),
			)
		else:
			cpds[name] = _table(name, c)
	initial = {}
	for name, provision in doc.get('initial_slices', {}).items():
		if provision == 'observed':
			initial[name] = InitialSlice.Observed()
		else:
			initial[name] = InitialSlice.Table(_table(name, provision))
	return DnmSpec(SliceTemplate(variables, arcs), lagged, cpds, initial)

def _lag(value: Any) -> int:
	# bool is an int subclass, and int() would truncate 1.7
	if isinstance(value, bool) or not isinstance(value, (int, float)):
		raise error.FormatError("lag {!r} is not a number".format(value))
	if isinstance(value, float):
		if not value.is_integer():
			raise error.FormatError("lag {!r} is not an integer".format(value))
		return int(value)
	return value

def _parent(p: Any) -> Parent:
	if isinstance(p, str):
		return (p, 0)
	name, lag = p
	return (str(name), _lag(lag))

def _table(name: str, c: Dict[str, Any]) -> TableCPD:
	return TableCPD(name, [_parent(p) for p in c.get('parents', [])], _rows(c['rows']))

def _rows(rows: Dict[str, List[float]]) -> Dict[RowKey, Distribution]:
	return {
		(tuple(key.split(',')) if key else ()): Distribution(probabilities)
		for key, probabilities in rows.items()
	}

def emit_model(spec: DnmSpec) -> str:
	cpds = {}
	for v in spec.template.variables:
		cpd = spec.cpds[v.name]
		if isinstance(cpd, MixtureCPD):
			cpds[v.name] = {
				'type': 'mixture',
				'decomposition': cpd.decomposition.value,
				'q_parents': list(cpd.q_parents),
				'q_table': _emit_rows(cpd.q_table),
				'r_parents': [[p, k] for p, k in cpd.r_parents],
				'r_table': _emit_rows(cpd.r_table),
				'alpha_init': cpd.alpha,
			}
		else:
			cpds[v.name] = _emit_table(cpd)
	doc = {
		'variables': [{ 'name': v.name, 'states': list(v.states) } for v in spec.template.variables],
		'contemporaneous_arcs': [[a, b] for a, b in spec.template.contemporaneous_arcs],
		'lagged_arcs': [{ 'from': a.source, 'lag': a.lag, 'to': a.target } for a in spec.lagged_arcs],
		'cpds': cpds,
		'initial_slices': {
			name: ('observed' if provision.cpd is None else _emit_table(provision.cpd))
			for name, provision in spec.initial_slices.items()
		},
	}
	return json.dumps(doc, indent = '\t') + '\n'

def _emit_table(cpd: TableCPD) -> Dict[str, Any]:
	return {
		'parents': [p if k == 0 else [p, k] for p, k in cpd.parents],
		'rows': _emit_rows(cpd.rows),
	}

def _emit_rows(rows: Mapping[RowKey, Distribution]) -> Dict[str, List[float]]:
	return { ','.join(key): list(row) for key, row in rows.items() }
