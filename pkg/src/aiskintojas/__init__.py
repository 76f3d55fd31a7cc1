"""Aiskintojas: gydytojo aiskinimo pasirinkimas, ivertinant paciento gailesti."""

__version__ = "0.1.0"
