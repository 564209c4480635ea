from functools import wraps
from typing import Callable, NamedTuple, Optional, Sequence

from cropd.exceptions import CropdError
from cropd.runner.exceptions import ConfigError, StageError


class StageMetadata(NamedTuple):
    """Name, upstream stages and one-line description of a pipeline stage"""

    name: str
    depends_on: tuple[str, ...]
    description: str


def pipeline_stage(name: Optional[str] = None, depends_on: Sequence[str] = ()) -> Callable:
    """Decorator marking a runtime method as a named pipeline stage

    Failures other than configuration errors are re-raised as StageError
    carrying the stage name.

    Args:
        name: Stage name, defaults to the method name
        depends_on: Stages whose artifacts this stage reads
    """

    def decorator(func: Callable) -> Callable:
        stage_name = name or func.__name__
        doc = (func.__doc__ or "").strip().splitlines()

        @wraps(func)
        def wrapper(self, *args, **kwargs):
            try:
                return func(self, *args, **kwargs)
            except (StageError, ConfigError):
                raise
            except (CropdError, ArithmeticError, LookupError, RuntimeError, TypeError, ValueError, OSError) as e:
                raise StageError(stage_name, str(e)) from e

        wrapper.stage_metadata = StageMetadata(
            name=stage_name,
            depends_on=tuple(depends_on),
            description=doc[0] if doc else "",
        )
        return wrapper

    return decorator


def list_stages(obj: object) -> list[StageMetadata]:
    """Stages defined on `obj`, in dependency order."""
    found = {}
    for attribute in dir(type(obj)):
        metadata = getattr(getattr(type(obj), attribute), "stage_metadata", None)
        if metadata is not None:
            found[metadata.name] = metadata

    ordered: list[StageMetadata] = []

    def visit(stage: str) -> None:
        if any(m.name == stage for m in ordered):
            return
        for upstream in found[stage].depends_on:
            visit(upstream)
        ordered.append(found[stage])

    for stage in sorted(found):
        visit(stage)
    return ordered
