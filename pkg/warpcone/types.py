"""
SPDX-License-Identifier: BSD-3-Clause
Copyright (c) 2024 warpcone developers.
See LICENSE.txt for license details.
"""

from collections import OrderedDict
import copy
import logging
import math
from bidict import bidict

from warpcone.errors import PreconditionError


class FloatField():
    ''' Real number, optionally range checked '''
    _shortname = 'float'

    def __init__(self, unit=None, parent=None, default=None, minimum=None, maximum=None,
                 exclusive=False, required=False):
        self._unit = unit
        self._default = default
        self._value = default
        self._minimum = minimum
        self._maximum = maximum
        self._exclusive = exclusive
        self._required = required

    def update(self, value):
        if value is None:
            self._value = None
            return
        if isinstance(value, bool):
            raise ValueError(f'expected a number, received {value!r}')
        value = float(value)
        if math.isnan(value):
            raise ValueError('NaN is not a valid value')
        if self._minimum is not None:
            if value < self._minimum or (self._exclusive and value == self._minimum):
                raise ValueError(f'{value} below minimum {self._minimum}')
        if self._maximum is not None:
            if value > self._maximum or (self._exclusive and value == self._maximum):
                raise ValueError(f'{value} above maximum {self._maximum}')
        self._value = value

    def to_dict(self):
        return self._value

    def val_not_default(self):
        return self.to_dict() != self._default


class IntField():
    ''' Integer number, optionally bounded below '''
    _shortname = 'int'

    def __init__(self, unit=None, parent=None, default=None, minimum=None, required=False):
        self._default = default
        self._value = default
        self._minimum = minimum
        self._required = required

    def update(self, value):
        if value is None:
            self._value = None
            return
        if isinstance(value, bool) or float(value) != int(value):
            raise ValueError(f'expected an integer, received {value!r}')
        value = int(value)
        if self._minimum is not None and value < self._minimum:
            raise ValueError(f'{value} below minimum {self._minimum}')
        self._value = value

    def to_dict(self):
        return self._value

    def val_not_default(self):
        return self.to_dict() != self._default


class BoolField():
    ''' Boolean flag '''
    _shortname = 'bool'

    def __init__(self, unit=None, parent=None, default=None, required=False):
        self._default = default
        self._value = default
        self._required = required

    def update(self, value):
        if value is not None and not isinstance(value, bool):
            raise ValueError(f'expected true/false, received {value!r}')
        self._value = value

    def to_dict(self):
        return self._value

    def val_not_default(self):
        return self.to_dict() != self._default


class TextField():
    ''' Free text '''
    _shortname = 'str'

    def __init__(self, unit=None, parent=None, default=None, required=False):
        self._default = default
        self._value = default
        self._required = required

    def update(self, value):
        self._value = str(value) if value is not None else None

    def to_dict(self):
        return self._value

    def val_not_default(self):
        return self.to_dict() != self._default


class EnumField():
    ''' Field restricted to named constants '''
    _shortname = 'enum'

    def __init__(self, unit=None, parent=None, default=None, constants=None, required=False):
        self._constants_lookup = bidict(constants)
        self._default = default
        self._value = self._constants_lookup[default] if default is not None else None
        self._required = required

    def update(self, value):
        if value in self._constants_lookup:
            self._value = self._constants_lookup[value]
        elif value in self._constants_lookup.inverse:
            self._value = value
        else:
            raise ValueError(f'{value!r} is not one of {", ".join(self._constants_lookup.keys())}')

    def value(self):
        return self._value

    def to_dict(self):
        if self._value is None:
            return None
        return self._constants_lookup.inverse[self._value]

    def val_not_default(self):
        return self.to_dict() != self._default


class FloatListField():
    ''' List of real numbers '''
    _shortname = 'floats'

    def __init__(self, unit=None, parent=None, minimum=None, exclusive=False, required=False):
        self._unit = unit
        self._minimum = minimum
        self._exclusive = exclusive
        self._value = []
        self._required = required

    def update(self, value):
        check = FloatField(minimum=self._minimum, exclusive=self._exclusive)
        result = []
        for v in value:
            if v is None:
                raise ValueError('missing list element')
            check.update(v)
            result.append(check.to_dict())
        self._value = result

    def to_dict(self):
        return list(self._value)

    def val_not_default(self):
        return len(self._value) != 0


class ArcSetField():
    ''' Per boundary component, a list of closed arcs given as [center, half_length] '''
    _shortname = 'arcsets'

    def __init__(self, unit=None, parent=None, required=False):
        self._value = []
        self._required = required

    def update(self, value):
        result = []
        for component in value:
            arcs = []
            for arc in component:
                if len(arc) != 2:
                    raise ValueError(f'arc {arc!r} is not a [center, half_length] pair')
                center, half = float(arc[0]), float(arc[1])
                if not math.isfinite(center) or not half >= 0:
                    raise ValueError(f'arc {arc!r} needs a finite center and half_length >= 0')
                arcs.append([center, half])
            result.append(arcs)
        self._value = result

    def to_dict(self):
        return [[list(a) for a in component] for component in self._value]

    def val_not_default(self):
        return len(self._value) != 0


class MappingField():
    ''' Free-form nested mapping (report detail) '''
    _shortname = 'map'

    def __init__(self, unit=None, parent=None, required=False):
        self._value = {}
        self._required = required

    def update(self, value):
        self._value = copy.deepcopy(dict(value))

    def to_dict(self):
        return copy.deepcopy(self._value)

    def val_not_default(self):
        return len(self._value) != 0


class NestedField():
    ''' Field containing one instance of another document '''
    _shortname = 'nested'

    def __init__(self, cls, parent=None, required=False):
        self._cls = cls
        self._record = None
        self._required = required
        self._value = None

    def update(self, initdict):
        if initdict is None or isinstance(initdict, self._cls):
            self._record = initdict
        else:
            self._record = self._cls(initdict)
        self._value = self._record

    def record(self):
        return self._record

    def __repr__(self):
        return self.to_dict().__repr__()

    def to_dict(self):
        return self._record.to_dict() if self._record is not None else None

    def val_not_default(self):
        return self._record is not None


class ArrayField():
    ''' Field containing an array of instances of another document '''
    _shortname = 'array'

    def __init__(self, cls, parent=None, initdict=None, required=False):
        self._parent = parent
        self._cls = cls
        self._records = []
        self._required = required
        self._value = self._records
        if initdict is not None:
            self.update(initdict)

    def update(self, initdict):
        self._records = []
        for v in initdict:
            self._records.append(v if isinstance(v, self._cls) else self._cls(v))
        self._value = self._records

    def records(self):
        return list(self._records)

    def __repr__(self):
        return self.to_dict().__repr__()

    def to_dict(self):
        return [v.to_dict() for v in self._records]

    def num_elems(self):
        return len(self._records)

    def val_not_default(self):
        return self.num_elems() != 0


class DescriptorBase:
    ''' Common base class for schema-driven documents '''

    # reports list every field, descriptors only the ones set away from default
    _emit_defaults = False

    def __init__(self, initdict=None):
        self._dict = OrderedDict()
        for v in self._schema:
            kwargs = v[3] if len(v) > 3 else {}
            obj = v[1]
            if len(v) > 2:
                obj = obj(v[2], parent=self, **kwargs)
            else:
                obj = obj(parent=self, **kwargs)
            self._dict[v[0]] = obj

        if initdict is not None:
            self.update(initdict)

    # dict interface

    def __getitem__(self, key):
        # check for special accessor
        fname = f'_get_{key}'
        if hasattr(self, fname):
            return getattr(self, fname)()
        else:
            # use generic accessor
            return self._get(key)

    def __setitem__(self, key, value):
        # check for special accessor
        fname = f'_set_{key}'
        if hasattr(self, fname):
            getattr(self, fname)(value)
        else:
            # use generic accessor
            self._set(key, value)

    def __contains__(self, key):
        return hasattr(self, f'_set_{key}') or key in self._dict

    def __repr__(self):
        return repr(self.to_dict())

    def update(self, src):
        for k, v in src.items():
            if k not in self:
                raise PreconditionError('invalid-descriptor', f'{self.__class__.__name__} has no field "{k}"')
            self[k] = v

    def to_dict(self):
        # Fields starting with _ are ignored by convention (internal values).
        return {
            k: self[k] for k in self._dict.keys()
            if not k.startswith('_') and (self._emit_defaults or self._dict[k].val_not_default())
        }

    def validate(self):
        ''' raise if a required field was never set '''
        for k, v in self._dict.items():
            if v._required and v._value is None:
                raise PreconditionError('invalid-descriptor', f'{self.__class__.__name__}: missing field "{k}"')
        return self

    # accessors

    def _get(self, key):
        return self._dict[key].to_dict()

    def _set(self, key, value):
        try:
            self._dict[key].update(value)
        except (TypeError, ValueError) as e:
            if isinstance(e, PreconditionError):
                raise
            raise PreconditionError('invalid-descriptor', f'{self.__class__.__name__}.{key}: {e}')

    def _field(self, key):
        return self._dict[key]


class SchemaTagged(DescriptorBase):
    ''' Document carrying the schema version tag and its type name '''

    schema_tag = 'warpcone/1'
    ignore_schema_errors = False

    def _schema_error(self, msg):
        if not self.ignore_schema_errors:
            raise PreconditionError('invalid-descriptor', f'{self.__class__.__name__}: {msg}')
        logging.warning(f'{self.__class__.__name__}: ignoring schema error: {msg}')

    def update(self, src):
        src = dict(src)
        tag = src.pop('schema', None)
        doc_type = src.pop('type', None)
        if tag is not None and tag != self.schema_tag:
            self._schema_error(f'expected schema "{self.schema_tag}", received "{tag}"')
        if doc_type is not None and doc_type != self.__class__.__name__:
            self._schema_error(f'document type "{doc_type}" does not match')
        super().update(src)

    def to_dict(self):
        return {'schema': self.schema_tag, 'type': self.__class__.__name__, **super().to_dict()}


class ReportBase(SchemaTagged):
    ''' Result document: every field is emitted, in schema order '''

    _emit_defaults = True

    def __init__(self, initdict=None, **kwargs):
        super().__init__(initdict)
        if kwargs:
            self.update(kwargs)
