import numpy as np
import pytest

from core import error
from core.models import Variable, Distribution, TabularCPD, NetworkStructure, Evidence
from core.network import BeliefNetwork, validate_structure, posterior_enumerate, posterior_eliminate, forward_sample

from tests.mock import random_network, random_evidence, carsales_slice

def _binary(*names: str) -> list:
	return [Variable(name, ('H', 'L')) for name in names]

def test_validate_structure():
	variables = _binary('health', 'price', 'demand', 'supply')
	report = validate_structure(NetworkStructure(variables, {
		'price': ['health'], 'demand': ['price'], 'supply': ['demand', 'health'],
	}))
	assert report.ok
	
	assert validate_structure(NetworkStructure([])).ok
	
	report = validate_structure(NetworkStructure(_binary('a', 'b'), { 'a': ['b'], 'b': ['a'] }))
	assert report.kinds() == ['cycle']
	assert report.violations[0].location == 'cycle {a,b}'
	
	report = validate_structure(NetworkStructure(_binary('a', 'b'), { 'b': ['a', 'a', 'c'] }))
	assert sorted(report.kinds()) == ['duplicate-parent', 'unresolved']
	
	report = validate_structure(NetworkStructure(_binary('a', 'a')))
	assert report.kinds() == ['duplicate-name']

def test_network_rejects_bad_cpds():
	a, b = _binary('a', 'b')
	with pytest.raises(error.CompileError) as exc:
		BeliefNetwork([a, b], {
			'a': TabularCPD('a', [], { (): Distribution((0.5, 0.5)) }),
			'b': TabularCPD('b', ['a'], { ('H',): Distribution((0.5, 0.5)) }),
		})
	assert [v.kind for v in exc.value.violations] == ['missing-row']
	
	with pytest.raises(error.CompileError) as exc:
		BeliefNetwork([a, b], { 'a': TabularCPD('a', [], { (): Distribution((0.5, 0.5)) }) })
	assert [v.kind for v in exc.value.violations] == ['missing-cpd']

def test_distribution_and_variable():
	with pytest.raises(error.ModelError):
		Distribution((0.5, 0.6))
	with pytest.raises(error.ModelError):
		Distribution((1.5, -0.5))
	with pytest.raises(error.ModelError):
		Variable('x', ('H',))
	with pytest.raises(error.ModelError):
		Variable('x', ('H', 'H'))
	with pytest.raises(error.InvalidState):
		Variable('x', ('H', 'L')).index('M')
	
	d = Distribution.PointMass(1, 3)
	assert list(d) == [0.0, 1.0, 0.0]
	assert list(Distribution.Uniform(4)) == [0.25] * 4

def test_posterior_carsales_slice():
	net = carsales_slice()
	for posterior in (posterior_enumerate, posterior_eliminate):
		assert posterior(net, Evidence(), 'price')[0] == pytest.approx(0.4175, abs = 1e-12)
		assert posterior(net, Evidence(), 'demand')[0] == pytest.approx(0.483, abs = 1e-12)
		assert list(posterior(net, Evidence({ 'demand': 'H' }), 'demand')) == [1.0, 0.0]
		
		# Every other node observed: a single row lookup
		p = posterior(net, Evidence({ 'health': 'H', 'price': 'H', 'demand': 'L' }), 'supply')
		assert p[0] == pytest.approx(0.60, abs = 1e-12)

def test_posterior_errors():
	net = carsales_slice()
	with pytest.raises(error.UnknownVariable):
		posterior_eliminate(net, Evidence(), 'rain')
	with pytest.raises(error.UnknownVariable):
		posterior_eliminate(net, Evidence({ 'rain': 'H' }), 'price')
	with pytest.raises(error.InvalidState):
		posterior_enumerate(net, Evidence({ 'price': 'M' }), 'demand')
	
	a, b = _binary('a', 'b')
	det = BeliefNetwork([a, b], {
		'a': TabularCPD('a', [], { (): Distribution((0.5, 0.5)) }),
		'b': TabularCPD('b', ['a'], { ('H',): Distribution((1.0, 0.0)), ('L',): Distribution((0.0, 1.0)) }),
	})
	for posterior in (posterior_enumerate, posterior_eliminate):
		with pytest.raises(error.InconsistentEvidence):
			posterior(det, Evidence({ 'a': 'H', 'b': 'L' }), 'a')

def test_eliminate_matches_enumerate():
	rng = np.random.default_rng(1234)
	for _ in range(100):
		net = random_network(rng, int(rng.integers(2, 13)))
		evidence = random_evidence(rng, net)
		query = net.variables[int(rng.integers(len(net.variables)))].name
		expected = posterior_enumerate(net, evidence, query).probabilities
		actual = posterior_eliminate(net, evidence, query).probabilities
		assert np.max(np.abs(expected - actual)) < 1e-9
		assert abs(actual.sum() - 1.0) < 1e-9

def test_forward_sample():
	net = carsales_slice()
	batch = forward_sample(net, 7, 10 ** 6)
	assert len(batch) == 10 ** 6
	assert batch.frequency('health', 'H') == pytest.approx(0.85, abs = 0.002)
	assert batch.frequency('price', 'H') == pytest.approx(0.4175, abs = 0.002)
	assert batch.frequency('demand', 'H') == pytest.approx(0.483, abs = 0.002)
	
	again = forward_sample(net, 7, 50)
	assert list(again) == list(forward_sample(net, 7, 50))
	
	a, b = _binary('a', 'b')
	det = BeliefNetwork([a, b], {
		'a': TabularCPD('a', [], { (): Distribution((0.0, 1.0)) }),
		'b': TabularCPD('b', ['a'], { ('H',): Distribution((0.0, 1.0)), ('L',): Distribution((1.0, 0.0)) }),
	})
	assert all(s == { 'a': 'L', 'b': 'H' } for s in forward_sample(det, 3, 100))
	
	with pytest.raises(error.ModelError):
		forward_sample(net, 7, 0)
