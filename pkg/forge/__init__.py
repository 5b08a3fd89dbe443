from .circuit import Circuit
from .icm import expand_all
from .parser import parse_circuit, print_circuit

__all__ = ["Circuit", "expand_all", "parse_circuit", "print_circuit"]
