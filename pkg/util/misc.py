from typing import Any
import sys
import traceback

class Logger:
	__slots__ = ('prefix', '_gate')
	
	prefix: str
	_gate: str
	
	def __init__(self, prefix: str, obj: object, *, gate: str = 'DEBUG') -> None:
		self.prefix = '{}/{:04x}'.format(prefix, hash(obj) % 0xFFFF)
		self._gate = gate
	
	@property
	def enabled(self) -> bool:
		import settings
		return settings.DEBUG and bool(getattr(settings, self._gate, False))
	
	def info(self, *args: Any) -> None:
		# stdout carries CSV output, so the log goes to stderr
		if self.enabled:
			print(self.prefix, *args, file = sys.stderr)
	
	def error(self, exc: Exception) -> None:
		traceback.print_exception(type(exc), exc, exc.__traceback__)
