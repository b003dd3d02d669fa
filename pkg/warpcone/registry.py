"""
SPDX-License-Identifier: BSD-3-Clause
Copyright (c) 2024 warpcone developers.
See LICENSE.txt for license details.
"""

from enum import Enum, auto
from bidict import bidict

from warpcone.errors import PreconditionError


class DocKind(Enum):
    descriptor = auto()
    report = auto()


_documents = {kind: [] for kind in DocKind}
_by_name = {}

# warping "kind" name <-> warping function class
_warp_kinds = bidict()


def _register(cls, kind: DocKind):
    if cls.__name__ in _by_name:
        raise ValueError(f'document {cls.__name__} registered twice')
    _documents[kind].append(cls)
    _by_name[cls.__name__] = cls
    return cls


def descriptor(cls):
    ''' Register an input document '''
    return _register(cls, DocKind.descriptor)


def report(cls):
    ''' Register a result document '''
    return _register(cls, DocKind.report)


def warping(kind: str):
    ''' Register a warping function class under the "kind" of its descriptor '''
    def register_kind(cls):
        _warp_kinds[kind] = cls
        return cls
    return register_kind


def warping_class(kind: str):
    try:
        return _warp_kinds[kind]
    except KeyError:
        raise PreconditionError('invalid-descriptor', f'unknown warping kind "{kind}"') from None


def warping_kind(cls) -> str:
    return _warp_kinds.inverse[cls]


def warping_kinds():
    return list(_warp_kinds)


def documents(kinds=None):
    ''' Registered document classes in registration order, restricted to kinds if given '''
    if kinds is None:
        kinds = list(DocKind)
    elif isinstance(kinds, DocKind):
        kinds = [kinds]
    return [cls for kind in kinds for cls in _documents[kind]]


def document_class(name: str):
    try:
        return _by_name[name]
    except KeyError:
        raise PreconditionError('invalid-descriptor', f'unknown document "{name}"') from None


def summary(cls):
    ''' return: document name, first docstring line '''
    return cls.__name__, (str(cls.__doc__).strip().splitlines() or [''])[0]


def schema_rows(cls):
    ''' (name, type, options) of the public entries of a document schema '''
    rows = []
    for entry in cls._schema:
        name, field = entry[0], entry[1]._shortname
        if name.startswith('_'):
            continue
        if field in ('array', 'nested'):
            field += f' ({entry[2].__name__})'
        elif len(entry) > 2 and entry[2] is not None:
            field += f' ({entry[2]})'
        rows.append((name, field, entry[3] if len(entry) > 3 else {}))
    return rows
