from typing import List, TYPE_CHECKING

if TYPE_CHECKING:
	from .models import Violation

class ModelError(Exception):
	pass

class DataError(Exception):
	pass

class FormatError(Exception):
	pass

class CompileError(ModelError):
	violations: List['Violation']
	
	def __init__(self, violations: List['Violation']) -> None:
		super().__init__('; '.join(str(v) for v in violations))
		self.violations = violations

class UnknownVariable(ModelError):
	pass

class InvalidAlpha(ModelError):
	pass

class DegenerateMixture(ModelError):
	pass

class NoExtremum(ModelError):
	pass

class InsufficientSlices(ModelError):
	pass

class InconsistentEvidence(DataError):
	pass

class InvalidState(DataError):
	pass

class IncompleteWindow(DataError):
	pass

class MissingInitialObservation(DataError):
	pass

class ConflictingObservation(DataError):
	pass

class MalformedSeries(DataError):
	pass

class UndefinedAcf(DataError):
	pass

class SeriesTooShort(DataError):
	pass

class InvalidHorizon(DataError):
	pass
