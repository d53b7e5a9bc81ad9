import os
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv
from sympy import isprime


class Limits:
    """Default size limits for the group computations"""
    LATTICE_LIMIT = 5040
    ISO_LIMIT = 720
    ELEMENT_CACHE_LIMIT = 20000


OUTPUT_FORMATS = ('text', 'json')


class LimitExceededError(ValueError):
    """Raised when a group is larger than a configured limit."""

    def __init__(self, limit_name: str, limit: int, order: int):
        self.limit_name = limit_name
        self.limit = limit
        self.order = order
        super().__init__(f"group too large: order {order} exceeds {limit_name} limit {limit}")


def check_limit(limit_name: str, limit: int, order: int) -> None:
    if order > limit:
        raise LimitExceededError(limit_name, limit, order)


def parse_field_spec(text: str) -> int:
    """Return the characteristic named by a field spec: 0 for 'Q', p for 'F<p>'."""
    spec = text.strip()
    if spec.upper() == 'Q':
        return 0
    if spec[:1].upper() == 'F' and spec[1:].isdigit():
        p = int(spec[1:])
        if not isprime(p):
            raise ValueError(f"Invalid field {spec!r}: {p} is not prime")
        return p
    raise ValueError(f"Invalid field {spec!r}: expected Q or F<p>")


class Config:
    """Run configuration: environment (.env aware) first, explicit overrides last"""

    def __init__(self, **overrides):
        # .env sits next to the src/ package
        env_path = Path(__file__).resolve().parent.parent / '.env'
        if env_path.exists():
            load_dotenv(dotenv_path=env_path)
        else:
            load_dotenv()

        self.field = os.getenv('BISET_FIELD', 'Q')
        self.lattice_limit = self._parse_limit('BISET_LATTICE_LIMIT', Limits.LATTICE_LIMIT)
        self.iso_limit = self._parse_limit('BISET_ISO_LIMIT', Limits.ISO_LIMIT)
        self.element_cache_limit = self._parse_limit('BISET_ELEMENT_CACHE_LIMIT', Limits.ELEMENT_CACHE_LIMIT)
        self.verify = self._parse_bool(os.getenv('BISET_VERIFY', 'false'))
        self.output_format = os.getenv('BISET_OUTPUT', 'text')

        # Logging configuration
        self.log_level = os.getenv('LOG_LEVEL', 'WARNING')
        self.log_file: Optional[str] = os.getenv('LOG_FILE') or None

        for key, value in overrides.items():
            if value is None:
                continue
            if not hasattr(self, key):
                raise ValueError(f"Unknown configuration option: {key}")
            setattr(self, key, value)

        self._validate()

    def _parse_limit(self, name: str, default: int) -> int:
        raw = os.getenv(name, str(default))
        try:
            return int(raw)
        except ValueError:
            raise ValueError(f"{name} must be an integer, got {raw!r}")

    def _parse_bool(self, value: str) -> bool:
        """Parse boolean values from environment variables"""
        return value.lower() in ('true', '1', 'yes', 'on')

    def _validate(self) -> None:
        for name in ('lattice_limit', 'iso_limit', 'element_cache_limit'):
            if int(getattr(self, name)) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.output_format not in OUTPUT_FORMATS:
            raise ValueError(f"Invalid output format: {self.output_format}")
        self.characteristic = parse_field_spec(self.field)

    @property
    def field_label(self) -> str:
        return 'Q' if self.characteristic == 0 else f"F{self.characteristic}"
