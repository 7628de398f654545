import io
import json
import os
import pytest

from core import error
from core.dnm import compile, Decomposition
from core.engine import backtest
from core.carsales import build_carsales, carsales_series, NAMES
from util.model_file import load_model, parse_model, emit_model
from util.series_file import read_series, write_series, write_report, format_probability

from tests.mock import carsales_model

FIXTURES = os.path.join(os.path.dirname(os.path.dirname(__file__)), 'fixtures')

def test_bundled_fixtures():
	path = os.path.join(FIXTURES, 'carsales.json')
	spec = load_model(path)
	assert json.loads(emit_model(spec)) == json.loads(emit_model(build_carsales()))
	with open(path, encoding = 'utf-8') as fh:
		assert json.loads(fh.read()) == json.loads(emit_model(build_carsales()))
	
	model = compile(spec)
	assert read_series(os.path.join(FIXTURES, 'carsales.csv'), model) == carsales_series()

def test_model_round_trip():
	for decomposition in Decomposition:
		spec = build_carsales(decomposition = decomposition, alpha = 0.25)
		again = parse_model(emit_model(spec))
		assert emit_model(again) == emit_model(spec)
		a = write_report(backtest(compile(spec), carsales_series()))
		b = write_report(backtest(compile(again), carsales_series()))
		assert a == b

def test_model_parse_errors():
	with pytest.raises(error.FormatError):
		parse_model('{ "variables": [')
	with pytest.raises(error.FormatError):
		parse_model('{ "variables": [] }')
	with pytest.raises(error.FormatError):
		parse_model('{ "variables": [{ "name": "x" }], "cpds": {} }')
	with pytest.raises(error.FormatError):
		load_model('/nonexistent/model.json')
	
	doc = json.loads(emit_model(build_carsales()))
	doc['cpds']['supply']['decomposition'] = 'geometric'
	with pytest.raises(error.FormatError):
		parse_model(json.dumps(doc))

def test_lagged_tabular_parents():
	doc = {
		'variables': [{ 'name': 'x', 'states': ['H', 'L'] }],
		'lagged_arcs': [{ 'from': 'x', 'lag': 1, 'to': 'x' }],
		'cpds': { 'x': { 'parents': [['x', 1]], 'rows': { 'H': [0.9, 0.1], 'L': [0.2, 0.8] } } },
		'initial_slices': { 'x': { 'parents': [], 'rows': { '': [0.5, 0.5] } } },
	}
	spec = parse_model(json.dumps(doc))
	assert spec.cpds['x'].parents == (('x', 1),)
	model = compile(spec)
	assert model.max_lag == 1
	assert json.loads(emit_model(spec)) == dict(doc, contemporaneous_arcs = [])

def test_read_series_errors():
	model = carsales_model()
	with pytest.raises(error.MalformedSeries) as exc:
		read_series(io.StringIO('t,demand,health,price\n0,H,H,H\n'), model)
	assert 'supply' in str(exc.value)
	with pytest.raises(error.MalformedSeries):
		read_series(io.StringIO('t,demand,health,price,supply,rain\n0,H,H,H,L,H\n'), model)
	with pytest.raises(error.MalformedSeries):
		read_series(io.StringIO('demand,health,price,supply\nH,H,H,L\n'), model)
	with pytest.raises(error.MalformedSeries):
		read_series(io.StringIO('t,demand,health,price,supply\n1,H,H,H,L\n1,H,H,H,L\n'), model)
	with pytest.raises(error.MalformedSeries):
		read_series(io.StringIO('t,demand,health,price,supply\nx,H,H,H,L\n'), model)
	with pytest.raises(error.InvalidState):
		read_series(io.StringIO('t,demand,health,price,supply\n0,H,H,M,L\n'), model)
	with pytest.raises(error.MalformedSeries) as exc:
		read_series(io.StringIO('t,demand,health,price,supply\n0,H,H,H,L\n1,H,H\n'), model)
	assert 'row 2' in str(exc.value)
	with pytest.raises(error.MalformedSeries):
		read_series(io.StringIO('t,demand,health,price,supply\n0,H,H,H,L,H\n'), model)
	with pytest.raises(error.FormatError):
		read_series(io.StringIO(''), model)

def test_read_series_missing_cells():
	model = carsales_model()
	series = read_series(io.StringIO('t,supply,demand,health,price\n0,L,H,H,H\n1,,L,H,\n'), model)
	assert series == [
		(0, { 'demand': 'H', 'health': 'H', 'price': 'H', 'supply': 'L' }),
		(1, { 'demand': 'L', 'health': 'H' }),
	]

def test_write_series():
	text = write_series([(0, { 'demand': 'H', 'supply': 'L' }), (1, {})], NAMES)
	assert text.splitlines() == ['t,demand,health,price,supply', '0,H,,,L', '1,,,,']
	assert read_series(io.StringIO(write_series(carsales_series(), NAMES)), carsales_model()) == carsales_series()

def test_format_probability():
	assert format_probability(0.5) == '0.500000'
	assert format_probability(0.555975) == '0.555975'
	assert format_probability(0.7279875) == '0.727988'
	assert format_probability(0.0000005) == '0.000000'
	assert format_probability(0.0000015) == '0.000002'
	assert format_probability(1.0) == '1.000000'
	assert format_probability(0.0) == '0.000000'
	# Float noise below an exact decimal tie still rounds half-even
	assert format_probability(0.47798749999999996) == '0.477988'
	assert format_probability(0.7279874999999999) == '0.727988'
	assert format_probability(0.4779865) == '0.477986'

def test_model_lags_must_be_integers():
	doc = json.loads(emit_model(build_carsales()))
	for lag in (1.7, True, '1', None):
		bad = json.loads(json.dumps(doc))
		bad['lagged_arcs'][0]['lag'] = lag
		with pytest.raises(error.FormatError):
			parse_model(json.dumps(bad))
	
	bad = json.loads(json.dumps(doc))
	bad['cpds']['supply']['r_parents'][0][1] = 0.5
	with pytest.raises(error.FormatError):
		parse_model(json.dumps(bad))
	
	whole = json.loads(json.dumps(doc))
	whole['lagged_arcs'][0]['lag'] = 1.0
	assert compile(parse_model(json.dumps(whole))).max_lag == 1
