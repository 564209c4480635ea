from cropd.utils.seeding import seeded, torch_generator
from cropd.utils.serialization import (
    canonical_json,
    sha256_hex,
    parse_real,
    format_real,
    finite_or_none,
)

__all__ = [
    "seeded",
    "torch_generator",
    "canonical_json",
    "sha256_hex",
    "parse_real",
    "format_real",
    "finite_or_none",
]
