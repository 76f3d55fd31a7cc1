from __future__ import annotations


class AiskintojasError(Exception):
    """Bazine visu paketo klaidu klase."""


class DomainError(AiskintojasError, ValueError):
    """Argumentas uz leistinos srities ribu."""


class ScenarioLabelError(DomainError):
    pass


class ConfigError(AiskintojasError, ValueError):
    pass


class ParseError(AiskintojasError, ValueError):
    """Netinkamas CSV ar parametru failas. Zinute visada nurodo vieta."""

    def __init__(
        self,
        message: str,
        *,
        row: int | None = None,
        column: str | None = None,
        field: str | None = None,
    ) -> None:
        where: list[str] = []
        if row is not None:
            where.append(f"eilute {row}")
        if column is not None:
            where.append(f"stulpelis '{column}'")
        if field is not None:
            where.append(f"laukas '{field}'")
        full = f"{'; '.join(where)}: {message}" if where else message
        super().__init__(full)
        self.row = row
        self.column = column
        self.field = field


class InvariantViolation(AiskintojasError, RuntimeError):
    pass


class NumericError(AiskintojasError, ArithmeticError):
    pass


class UnreliableResultError(AiskintojasError, RuntimeError):
    pass
