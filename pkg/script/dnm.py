from typing import Any, Callable, Dict, Optional
import functools
import os
import sys
import jinja2

from core import error
from core.dnm import CompiledModel, compile
from core.engine import backtest as run_backtest, replay, simulate_series
from core.diagnostics import residuals, whiteness_summary
from core.carsales import build_carsales, carsales_series, NAMES
from util.model_file import load_model, emit_model
from util.series_file import read_series, write_series, write_report, write_forecast, format_probability
from util.misc import Logger

TMPL_DIR = os.path.join(os.path.dirname(__file__), 'tmpl')

_logger = Logger('dnm', TMPL_DIR)

def _command(fn: Callable[..., int]) -> Callable[..., int]:
	@functools.wraps(fn)
	def wrapper(*args: Any, **kwargs: Any) -> int:
		try:
			return fn(*args, **kwargs)
		except error.FormatError as ex:
			print("error: {}".format(ex), file = sys.stderr)
			return 2
		except error.CompileError as ex:
			for violation in ex.violations:
				print(violation, file = sys.stderr)
			return 1
		except (error.ModelError, error.DataError) as ex:
			print("error: {}".format(ex), file = sys.stderr)
			return 1
		except Exception as ex:
			_logger.error(ex)
			return 1
	return wrapper

def _model(path: str) -> CompiledModel:
	return compile(load_model(path))

def _state_map(text: str) -> Dict[str, str]:
	result = {}
	for item in filter(None, (s.strip() for s in text.split(','))):
		name, eq, state = item.partition('=')
		if not eq or not name or not state:
			raise error.FormatError("state map entry {!r} is not var=state".format(item))
		result[name] = state
	return result

@_command
def validate(model: str) -> int:
	try:
		compiled = _model(model)
	except error.CompileError as ex:
		for violation in ex.violations:
			print(violation)
		return 1
	print("ok: {} variables, max lag {}".format(len(compiled.variables), compiled.max_lag))
	return 0

@_command
def backtest(*, model: str, data: str, window: Optional[int] = None, state_map: str = '') -> int:
	compiled = _model(model)
	series = read_series(data, compiled)
	report = run_backtest(compiled, series, window = window, designated = _state_map(state_map))
	sys.stdout.write(write_report(report))
	return 0

@_command
def forecast(*, model: str, data: str, horizon: int, window: Optional[int] = None) -> int:
	if horizon < 1:
		print("error: horizon must be at least 1", file = sys.stderr)
		return 2
	compiled = _model(model)
	session = replay(compiled, read_series(data, compiled), window = window)
	sys.stdout.write(write_forecast(session.forecast(horizon)))
	return 0

@_command
def diagnose(*, model: str, data: str, var: str, state: str, maxlag: Optional[int] = None, window: Optional[int] = None, frozen: bool = False) -> int:
	compiled = _model(model)
	series = read_series(data, compiled)
	report = run_backtest(compiled, series, window = window, update = not frozen)
	summary = whiteness_summary(residuals(report, var, state).values, maxlag)
	env = jinja2.Environment(loader = jinja2.FileSystemLoader(TMPL_DIR), keep_trailing_newline = True)
	tmpl = env.get_template('diagnose.txt')
	sys.stdout.write(tmpl.render(variable = var, state = state, report = summary, fmt = format_probability))
	return 0

@_command
def simulate(*, model: str, periods: int, seed: int) -> int:
	compiled = _model(model)
	series = simulate_series(compiled, periods, seed)
	sys.stdout.write(write_series(series, compiled.names))
	return 0

@_command
def example(name: str, *, out: str = '.') -> int:
	if name != 'carsales':
		print("error: unknown example '{}'".format(name), file = sys.stderr)
		return 2
	try:
		with open(os.path.join(out, 'carsales.json'), 'w', encoding = 'utf-8', newline = '\n') as fh:
			fh.write(emit_model(build_carsales()))
		with open(os.path.join(out, 'carsales.csv'), 'w', encoding = 'utf-8', newline = '') as fh:
			fh.write(write_series(carsales_series(), NAMES))
	except OSError as ex:
		raise error.FormatError("cannot write fixtures: {}".format(ex)) from ex
	return 0

if __name__ == '__main__':
	import funcli
	sys.exit(funcli.main({ validate, backtest, forecast, diagnose, simulate, example }))
