import numpy as np
import pytest

from core import error
from core.models import Variable, Distribution
from core.dnm import SliceTemplate, LaggedArc, TableCPD, InitialSlice, DnmSpec, compile
from core.engine import ObservationHistory, Session, backtest, replay, forecast_unrolled, simulate_series
from core.carsales import carsales_series
from util.series_file import write_report

from tests.mock import carsales_model, truncated

ALPHA_STAR = [0.0, 0.0, 1.0, 0.5, 0.0, 0.0, 0.5, 1.0, 1.0, 0.0, 0.0]
S_BAR = [0.40, 0.40, 0.555975, 0.7279875, 0.90, 0.40, 0.4779875, 0.555975, 0.555975, 0.10, 0.10]

def _max_diff(a, b) -> float:
	worst = 0.0
	for h in range(1, len(a) + 1):
		for name in a.variables:
			diff = np.abs(a.at(h, name).probabilities - b.at(h, name).probabilities)
			worst = max(worst, float(diff.max()))
	return worst

def test_history():
	model = carsales_model()
	history = ObservationHistory(model)
	assert history.time == -1
	history.record(0, { 'demand': 'H', 'health': 'H', 'price': 'H', 'supply': 'L' })
	history.record(1, { 'demand': 'L' })
	assert history.time == 1
	assert not history.fully_observed(1)
	history.record(1, { 'demand': 'L', 'supply': 'H' })
	assert history.slice(1) == { 'demand': 'L', 'supply': 'H' }
	
	with pytest.raises(error.ConflictingObservation):
		history.record(0, { 'supply': 'H' })
	with pytest.raises(error.InvalidState):
		history.record(1, { 'price': 'M' })
	with pytest.raises(error.UnknownVariable):
		history.record(1, { 'rain': 'H' })
	with pytest.raises(error.MalformedSeries):
		history.record(3, { 'price': 'H' })
	with pytest.raises(error.MalformedSeries):
		history.record(-1, { 'price': 'H' })
	assert history.get(1, 'price') is None

def test_carsales_backtest():
	model = carsales_model()
	report = backtest(model, carsales_series(), designated = { 'supply': 'H' })
	assert [row.t for row in report.rows] == list(range(1, 12))
	assert [row.alphas['supply'] for row in report.rows] == pytest.approx(ALPHA_STAR, abs = 1e-9)
	s_bar = [report.forecast_probability(t, 'supply', 'H') for t in range(1, 12)]
	assert s_bar == pytest.approx(S_BAR, abs = 1e-9)
	
	assert report.row(2).estimates['supply'].alpha_m == pytest.approx(4.0, abs = 1e-9)
	assert report.row(4).estimates['supply'].alpha_m == pytest.approx(0.5, abs = 1e-9)
	assert report.row(9).estimates['supply'].alpha_m == pytest.approx(1.0, abs = 1e-9)
	assert report.row(1).estimates['supply'].window == (1, 1)
	assert report.row(5).estimates['supply'].window == (4, 5)
	
	frame = report.to_frame()
	assert list(frame.columns) == [
		't', 'alpha_star:supply', 'forecast:supply=H',
		'observed:demand', 'observed:health', 'observed:price', 'observed:supply',
	]
	assert list(frame['observed:supply'])[:3] == ['L', 'L', 'H']

def test_update_weights():
	model = carsales_model()
	session = replay(model, truncated(carsales_series(), 3))
	assert session.alphas['supply'] == pytest.approx(1.0, abs = 1e-9)
	assert [t for t, _ in session.alpha_trace('supply')] == [1, 2, 3]
	
	session = replay(model, truncated(carsales_series(), 10))
	assert session.alphas['supply'] == 0.0
	
	static = compile(_static_spec())
	session = replay(static, [(0, { 'a': 'H', 'b': 'L' }), (1, { 'a': 'L', 'b': 'L' })])
	assert session.update_weights() == {}

def test_skipped_update_keeps_alpha():
	model = carsales_model()
	series = carsales_series()
	del series[2][1]['supply']
	session = Session(model)
	for t, obs in truncated(series, 3):
		session.observe(t, obs)
		session.update_weights()
	assert [t for t, _ in session.alpha_trace('supply')] == [1]
	assert session.alphas['supply'] == 0.0

def test_forecasts():
	model = carsales_model()
	for t, expected in ((5, 0.90), (3, 0.555975), (4, 0.7279875)):
		session = replay(model, truncated(carsales_series(), t))
		profile = session.forecast(1)
		assert profile.origin == t
		assert profile.probability(1, 'supply', 'H') == pytest.approx(expected, abs = 1e-9)
	
	with pytest.raises(error.InvalidHorizon):
		session.forecast(0)
	with pytest.raises(error.InvalidHorizon):
		profile.at(2, 'supply')

def test_scroll_matches_unroll():
	model = carsales_model()
	for t in (0, 4, 11):
		session = replay(model, truncated(carsales_series(), t))
		scrolled = session.forecast(5)
		unrolled = forecast_unrolled(model, session.history, session.alphas, 5)
		assert len(scrolled) == 5
		assert _max_diff(scrolled, unrolled) < 1e-9
		
		# Extending the horizon leaves the earlier entries alone
		short = session.forecast(2)
		for h in (1, 2):
			for name in model.names:
				assert np.max(np.abs(short.at(h, name).probabilities - scrolled.at(h, name).probabilities)) < 1e-9

def test_forecast_with_partial_slices():
	model = carsales_model()
	series = truncated(carsales_series(), 6)
	del series[6][1]['price']
	del series[5][1]['health']
	session = replay(model, series)
	assert _max_diff(session.forecast(3), forecast_unrolled(model, session.history, session.alphas, 3)) < 1e-9
	
	session = Session(model)
	session.observe(0, { 'demand': 'H', 'health': 'H', 'price': 'H' })
	with pytest.raises(error.MissingInitialObservation):
		session.forecast(1)

def _static_spec() -> DnmSpec:
	a, b = Variable('a', ('H', 'L')), Variable('b', ('H', 'L'))
	return DnmSpec(SliceTemplate([a, b], [('a', 'b')]), [], {
		'a': TableCPD('a', [], { (): Distribution((0.3, 0.7)) }),
		'b': TableCPD('b', [('a', 0)], { ('H',): Distribution((0.9, 0.1)), ('L',): Distribution((0.2, 0.8)) }),
	})

def test_static_forecasts_repeat():
	model = compile(_static_spec())
	session = replay(model, [(0, { 'a': 'H', 'b': 'H' }), (1, { 'a': 'L' })])
	profile = session.forecast(4)
	for h in range(1, 5):
		assert profile.probability(h, 'a', 'H') == pytest.approx(0.3, abs = 1e-12)
		assert profile.probability(h, 'b', 'H') == pytest.approx(0.3 * 0.9 + 0.7 * 0.2, abs = 1e-12)

def test_lag_two_model():
	x = Variable('x', ('H', 'L'))
	spec = DnmSpec(SliceTemplate([x], []), [LaggedArc('x', 2, 'x')], {
		'x': TableCPD('x', [('x', 2)], { ('H',): Distribution((0.8, 0.2)), ('L',): Distribution((0.3, 0.7)) }),
	}, {
		'x': InitialSlice.Table(TableCPD('x', [], { (): Distribution((0.5, 0.5)) })),
	})
	model = compile(spec)
	assert model.max_lag == 2
	session = replay(model, [(0, { 'x': 'H' }), (1, { 'x': 'L' }), (2, { 'x': 'L' })])
	profile = session.forecast(2)
	assert profile.probability(1, 'x', 'H') == pytest.approx(0.3, abs = 1e-12)
	assert profile.probability(2, 'x', 'H') == pytest.approx(0.3, abs = 1e-12)
	assert _max_diff(profile, forecast_unrolled(model, session.history, session.alphas, 2)) < 1e-9

def test_backtest_causality():
	model = carsales_model()
	full = write_report(backtest(model, carsales_series())).splitlines()
	for through in range(0, 11):
		part = write_report(backtest(model, truncated(carsales_series(), through))).splitlines()
		assert part == full[:len(part)]
		assert len(part) == 1 + through
	
	assert len(backtest(model, truncated(carsales_series(), 0))) == 0

def test_frozen_backtest():
	model = carsales_model()
	report = backtest(model, carsales_series(), update = False)
	assert all(row.alphas['supply'] == 0.5 for row in report.rows)
	assert all(row.estimates == {} for row in report.rows)
	assert report.forecast_probability(4, 'supply', 'H') == pytest.approx(0.7279875, abs = 1e-9)

def test_simulate_series():
	model = carsales_model()
	series = simulate_series(model, 1000, 11)
	assert len(series) == 1000
	assert [t for t, _ in series] == list(range(1000))
	assert all(len(obs) == 4 for _, obs in series)
	share = np.mean([obs['health'] == 'H' for _, obs in series])
	assert share == pytest.approx(0.85, abs = 0.04)
	assert simulate_series(model, 50, 3) == simulate_series(model, 50, 3)
	
	report = backtest(model, series)
	assert len(report) == 999
	
	with pytest.raises(error.SeriesTooShort):
		simulate_series(model, 0, 1)

def test_session_alpha_overrides():
	model = carsales_model()
	assert Session(model, alphas = { 'supply': 0.25 }).alphas == { 'supply': 0.25 }
	with pytest.raises(error.InvalidAlpha):
		Session(model, alphas = { 'supply': 1.5 })
	with pytest.raises(error.InvalidAlpha):
		Session(model, alphas = { 'supply': float('nan') })
	with pytest.raises(error.UnknownVariable):
		Session(model, alphas = { 'price': 0.5 })
