from typing import Dict, List, Tuple, Optional

from .models import Variable, Distribution
from .dnm import SliceTemplate, LaggedArc, TableCPD, MixtureCPD, InitialSlice, DnmSpec, Decomposition

STATES = ('H', 'L')
NAMES = ('demand', 'health', 'price', 'supply')

# Columns d, h, p, s for t = 0..11
SERIES = [
	('H', 'H', 'H', 'L'),
	('H', 'H', 'H', 'L'),
	('H', 'H', 'H', 'L'),
	('L', 'H', 'H', 'H'),
	('L', 'H', 'H', 'H'),
	('L', 'H', 'H', 'H'),
	('L', 'H', 'L', 'H'),
	('L', 'H', 'L', 'H'),
	('L', 'H', 'L', 'H'),
	('L', 'L', 'L', 'L'),
	('L', 'L', 'L', 'L'),
	('L', 'L', 'L', 'L'),
]

def _binary(p_high: float) -> Distribution:
	return Distribution((p_high, round(1.0 - p_high, 10)))

def build_carsales(*, decomposition: Decomposition = Decomposition.Additive, alpha: float = 0.5, r_table: Optional[Dict[str, float]] = None) -> DnmSpec:
	variables = [Variable(name, STATES) for name in NAMES]
	template = SliceTemplate(variables, [
		('health', 'price'), ('price', 'demand'), ('demand', 'supply'), ('health', 'supply'),
	])
	lagged = [LaggedArc('price', 1, 'supply'), LaggedArc('supply', 1, 'supply')]
	
	q = { 'HH': 0.55, 'HL': 0.25, 'LH': 0.60, 'LL': 0.55 }
	r = r_table or { 'HH': 0.90, 'HL': 0.40, 'LH': 0.40, 'LL': 0.10 }
	cpds = {
		'health': TableCPD('health', [], { (): _binary(0.85) }),
		'price': TableCPD('price', [('health', 0)], {
			('H',): _binary(0.35),
			('L',): _binary(0.80),
		}),
		'demand': TableCPD('demand', [('price', 0)], {
			('H',): _binary(0.25),
			('L',): _binary(0.65),
		}),
		'supply': MixtureCPD(
			'supply',
			['demand', 'health'], { tuple(k): _binary(v) for k, v in q.items() },
			[('price', 1), ('supply', 1)], { tuple(k): _binary(v) for k, v in r.items() },
			decomposition = decomposition, alpha = alpha,
		),
	}
	return DnmSpec(template, lagged, cpds, { 'supply': InitialSlice.Observed() })

def shuffled_r_carsales() -> DnmSpec:
	# R rows for (H,H) and (L,L) exchanged
	return build_carsales(r_table = { 'HH': 0.10, 'HL': 0.40, 'LH': 0.40, 'LL': 0.90 })

def carsales_series() -> List[Tuple[int, Dict[str, str]]]:
	return [(t, dict(zip(NAMES, row))) for t, row in enumerate(SERIES)]
