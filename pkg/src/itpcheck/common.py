"Small helpers shared by the analyses"

from dataclasses import fields
from typing import Callable, FrozenSet, Iterable, List, Set, TypeVar

__all__ = [
    "add_slots",
    "closure",
]

_T1 = TypeVar("_T1")
_Ttype = TypeVar("_Ttype", bound=type)


def closure(
    start: Iterable[_T1], step: Callable[[_T1], Iterable[_T1]]
) -> FrozenSet[_T1]:
    "``start`` and everything reached from it by repeating ``step``"
    seen: Set[_T1] = set(start)
    todo: List[_T1] = list(seen)
    while todo:
        for m in step(todo.pop()):
            if m not in seen:
                seen.add(m)
                todo.append(m)
    return frozenset(seen)


# From https://github.com/ericvsmith/dataclasses/blob/master/dataclass_tools.py
# License: https://github.com/ericvsmith/dataclasses/blob/master/LICENSE.txt
# Changed only `dataclass.fields` naming
def add_slots(cls: _Ttype) -> _Ttype:  # pragma: no cover
    # Need to create a new class, since we can't set __slots__
    #  after a class has been created.

    # Make sure __slots__ isn't already set.
    if "__slots__" in cls.__dict__:
        raise TypeError(f"{cls.__name__} already specifies __slots__")

    # Create a new dict for our new class.
    cls_dict = dict(cls.__dict__)
    field_names = tuple(f.name for f in fields(cls))
    cls_dict["__slots__"] = field_names
    for field_name in field_names:
        # Remove our attributes, if present. They'll still be
        #  available in _MARKER.
        cls_dict.pop(field_name, None)
    # Remove __dict__ itself.
    cls_dict.pop("__dict__", None)
    # And finally create the class.
    qualname = getattr(cls, "__qualname__", None)
    cls = type(cls)(cls.__name__, cls.__bases__, cls_dict)
    if qualname is not None:
        cls.__qualname__ = qualname
    return cls
