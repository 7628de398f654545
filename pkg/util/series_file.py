from typing import Dict, List, Sequence, Tuple, Union, IO
from decimal import Decimal, ROUND_HALF_EVEN
import csv
import io
import pandas as pd

from core import error
from core.dnm import CompiledModel
from core.engine import BacktestReport, ForecastProfile

Source = Union[str, IO[str]]

def _read_text(source: Source) -> str:
	try:
		if isinstance(source, str):
			with open(source, encoding = 'utf-8', newline = '') as fh:
				return fh.read()
		return source.read()
	except UnicodeDecodeError as ex:
		raise error.FormatError("series file cannot be parsed: {}".format(ex)) from ex
	except OSError as ex:
		raise error.FormatError("cannot read series file: {}".format(ex)) from ex

def _check_widths(text: str) -> None:
	# pandas pads short rows, so a truncated line would pass as missing cells
	rows = [row for row in csv.reader(io.StringIO(text)) if row]
	if not rows:
		return
	width = len(rows[0])
	for i, row in enumerate(rows[1:], 1):
		if len(row) != width:
			raise error.MalformedSeries("row {} has {} fields, the header has {}".format(i, len(row), width))

def read_series(source: Source, model: CompiledModel) -> List[Tuple[int, Dict[str, str]]]:
	text = _read_text(source)
	try:
		_check_widths(text)
		frame = pd.read_csv(io.StringIO(text), dtype = str, keep_default_na = False)
	except (csv.Error, pd.errors.ParserError, pd.errors.EmptyDataError) as ex:
		raise error.FormatError("series file cannot be parsed: {}".format(ex)) from ex
	
	columns = list(frame.columns)
	if 't' not in columns:
		raise error.MalformedSeries("series has no 't' column")
	for name in model.names:
		if name not in columns:
			raise error.MalformedSeries("series has no column for variable '{}'".format(name))
	for column in columns:
		if column != 't' and column not in model.names:
			raise error.MalformedSeries("column '{}' is not a model variable".format(column))
	
	series = []
	previous = -1
	for record in frame.to_dict('records'):
		try:
			t = int(record['t'])
		except ValueError as ex:
			raise error.MalformedSeries("time index {!r} is not an integer".format(record['t'])) from ex
		if t <= previous:
			raise error.MalformedSeries("time index {} does not follow {}".format(t, previous))
		previous = t
		assignments = {}
		for name in model.names:
			state = record[name].strip()
			if state:
				model.variable(name).index(state)
				assignments[name] = state
		series.append((t, assignments))
	return series

def format_probability(p: float) -> str:
	import settings
	quantum = Decimal(1).scaleb(-settings.PROBABILITY_DECIMALS)
	# Snap float noise so exact decimal ties round half-even
	return str(Decimal(repr(round(float(p), 12))).quantize(quantum, rounding = ROUND_HALF_EVEN))

def _csv(frame: pd.DataFrame) -> str:
	out = io.StringIO()
	frame.to_csv(out, index = False)
	return out.getvalue()

def write_series(series: Sequence[Tuple[int, Dict[str, str]]], names: Sequence[str]) -> str:
	frame = pd.DataFrame.from_records(
		[{ 't': t, **{ name: obs.get(name, '') for name in names } } for t, obs in series],
		columns = ['t', *names],
	)
	return _csv(frame)

def write_report(report: BacktestReport) -> str:
	frame = report.to_frame()
	for column in frame.columns:
		if column.startswith(('alpha_star:', 'forecast:')):
			frame[column] = frame[column].map(format_probability)
	return _csv(frame)

def write_forecast(profile: ForecastProfile) -> str:
	records = []
	for h in range(1, len(profile) + 1):
		for name, v in profile.variables.items():
			for i, state in enumerate(v.states):
				records.append({
					'horizon': h, 'variable': name, 'state': state,
					'probability': format_probability(profile.at(h, name)[i]),
				})
	return _csv(pd.DataFrame.from_records(records, columns = ['horizon', 'variable', 'state', 'probability']))
