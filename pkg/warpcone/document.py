"""
SPDX-License-Identifier: BSD-3-Clause
Copyright (c) 2024 warpcone developers.
See LICENSE.txt for license details.
"""

import json
import math
import os
import numpy as np
import yaml

from warpcone import __version__
from warpcone.errors import PreconditionError
from warpcone.registry import document_class


# YAML formatting helpers
class YamlFlowstyleList(list):
    pass

def yaml_flowstyle_list_rep(dumper, data):
    return dumper.represent_sequence(u'tag:yaml.org,2002:seq', data, flow_style=True)

yaml.add_representer(YamlFlowstyleList, yaml_flowstyle_list_rep)


def plain(part):
    ''' Convert numpy scalars / arrays inside a document tree to built-in types '''
    if isinstance(part, dict):
        return {str(k): plain(v) for k, v in part.items()}
    elif isinstance(part, (list, tuple, np.ndarray)):
        return [plain(v) for v in part]
    elif isinstance(part, (bool, np.bool_)):
        return bool(part)
    elif isinstance(part, (int, np.integer)):
        return int(part)
    elif isinstance(part, (float, np.floating)):
        return float(part)
    return part


def _fmt_scalar(part):
    if part is None:
        return 'null'
    elif isinstance(part, bool):
        return 'true' if part else 'false'
    elif isinstance(part, int):
        return str(part)
    elif isinstance(part, float):
        if math.isnan(part):
            return '"nan"'
        if math.isinf(part):
            return '"inf"' if part > 0 else '"-inf"'
        return format(part, '.17g')
    return json.dumps(str(part), ensure_ascii=False)


def fmt_json(part, indent=0):
    ''' Deterministic JSON: keys in insertion order, floats with 17 significant digits '''
    pad = '  ' * (indent + 1)
    if isinstance(part, dict):
        if len(part) == 0:
            return '{}'
        items = [f'{pad}{json.dumps(k, ensure_ascii=False)}: {fmt_json(v, indent + 1)}' for k, v in part.items()]
        return '{\n' + ',\n'.join(items) + '\n' + '  ' * indent + '}'
    elif isinstance(part, list):
        if len(part) == 0:
            return '[]'
        elements = [fmt_json(v, indent + 1) for v in part]
        if not any(isinstance(v, (dict, list)) for v in part):
            # reached edge of tree, keep the list on one line
            return '[' + ', '.join(elements) + ']'
        return '[\n' + ',\n'.join(pad + e for e in elements) + '\n' + '  ' * indent + ']'
    return _fmt_scalar(part)


def dump_json(doc):
    tree = doc.to_dict() if hasattr(doc, 'to_dict') else doc
    return fmt_json(plain(tree)) + '\n'


def dump_yaml(doc, comment=None):
    def fmt_tree(part):
        ''' Set lists at edges of tree to YAML flow style '''
        if type(part) is list:
            if len(part) == 0:
                return part, False
            part, edge_flags = zip(*[fmt_tree(elem) for elem in part])
            part = list(part)
            if all(edge_flags):
                part = YamlFlowstyleList(part)
            return part, False
        elif type(part) is dict:
            part = {k: fmt_tree(part[k])[0] for k in part.keys()}
            return part, False
        elif type(part) is str:
            return part, False
        else:
            # no dict, list, or str ==> reached edge of tree
            return part, True

    tree = doc.to_dict() if hasattr(doc, 'to_dict') else doc
    tree, _ = fmt_tree(plain(tree))
    result = f'# {comment}\n' if comment else ''
    return result + yaml.dump(tree, sort_keys=False)


def load_dict(fname):
    ''' Read a JSON or YAML file into a dict, picked by file extension '''
    _, ext = os.path.splitext(fname)
    with open(fname, 'r', encoding='utf-8') as infile:
        if ext == '.json':
            try:
                result = json.load(infile)
            except json.JSONDecodeError as e:
                raise PreconditionError('invalid-descriptor', f'{fname}: {e}')
        elif ext in ('.yml', '.yaml'):
            try:
                result = yaml.safe_load(infile)
            except yaml.YAMLError as e:
                raise PreconditionError('invalid-descriptor', f'{fname}: {e}')
        else:
            raise PreconditionError('invalid-descriptor', f'refusing to read {fname}: expected .json, .yml or .yaml')
    if type(result) is not dict:
        raise PreconditionError('invalid-descriptor', f'{fname}: top level is not a mapping')
    return result


def document_from_dict(src, expected=None):
    ''' Instantiate the registered document class named in src["type"] '''
    type_name = src.get('type')
    if type_name is None:
        if expected is None:
            raise PreconditionError('invalid-descriptor', 'document has no "type" entry')
        cls = expected
    else:
        cls = document_class(type_name)
        if expected is not None and not issubclass(cls, expected):
            raise PreconditionError('invalid-descriptor', f'expected {expected.__name__}, received {type_name}')
    return cls(src).validate()


def load_document(fname, expected=None):
    return document_from_dict(load_dict(fname), expected)


def save_document(fname, doc):
    _, ext = os.path.splitext(fname)
    if ext in ('.yml', '.yaml'):
        content = dump_yaml(doc, comment=f'created with warpcone {__version__}')
    else:
        content = dump_json(doc)
    with open(fname, 'w', encoding='utf-8') as outfile:
        outfile.write(content)
