"""Input/config validation helpers shared across the package."""

from __future__ import annotations


class InputError(ValueError):
    """Bad input data: malformed files, unknown domains, misaligned vectors."""


class ConfigError(ValueError):
    """Bad configuration: thresholds or selectors outside their legal range."""


def require(condition: bool, message: str, error: type[ValueError] = InputError) -> None:
    if not condition:
        raise error(message)


def check_fitted(estimator, attribute: str) -> None:
    """Raise if ``estimator`` has not been fitted (sklearn convention)."""
    if not hasattr(estimator, attribute):
        raise InputError(
            f"{type(estimator).__name__} is not fitted; call fit() before use"
        )


def check_domain(domain: str, domains, owner: str) -> None:
    if domain not in domains:
        raise InputError(f"unknown domain {domain!r} for {owner}; known: {list(domains)}")
