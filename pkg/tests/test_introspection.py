import os
import unittest
import warpcone.cli  # noqa: F401 registers every document
from warpcone.errors import PreconditionError
from warpcone.registry import DocKind, documents, document_class, schema_rows, summary
from warpcone.registry import warping_class, warping_kind, warping_kinds
from warpcone.warp_synth import ConeWarpingFunction, LinearWarp, WarpingDescriptor, synthesize


class TestIntrospection(unittest.TestCase):
    _docs_path = 'docs'

    def doc_schema_md(self, cls):
        w1 = 24
        w2 = 32
        w3 = 40
        result = f'|{"Name".ljust(w1)}|{"Type".ljust(w2)}|{"Opt".ljust(w3)}|\n'\
                 f'|{"-" * w1}|{"-" * w2}|{"-" * w3}|\n'

        for e_name, e_type, e_opt in schema_rows(cls):
            if 'constants' in e_opt:
                e_opt = ', '.join(f'`{k}`' for k in e_opt['constants'].keys())
            elif e_opt.get('required'):
                e_opt = 'required'
            else:
                e_opt = ''
            e_name = f'`{e_name}`'
            result += f'|{e_name.ljust(w1)}|{e_type.ljust(w2)}|{e_opt.ljust(w3)}|\n'
        result += '\n<br>\n\n'
        return result

    def test_registry(self):
        names = [summary(d)[0] for d in documents()]
        for name in ('ConeDescriptor', 'WarpingDescriptor', 'ManifoldDescriptor', 'SubspaceDescriptor',
                     'GluedDescriptor', 'Certificate', 'GeodesicReport', 'CatReport', 'ConditionsReport'):
            self.assertIn(name, names)
        self.assertEqual(len(names), len(set(names)))
        self.assertNotIn('LinearWarp', names)
        for d in documents(DocKind.report):
            self.assertTrue(summary(d)[1], msg=d.__name__)
        self.assertIn(document_class('CatReport'), documents(DocKind.report))
        with self.assertRaises(PreconditionError) as cm:
            document_class('LinearWarp')
        self.assertEqual(cm.exception.reason, 'invalid-descriptor')

    def test_warping_kinds(self):
        self.assertEqual(sorted(warping_kinds()), ['cone', 'linear'])
        self.assertIs(warping_class('cone'), ConeWarpingFunction)
        self.assertEqual(warping_kind(LinearWarp), 'linear')
        self.assertEqual(LinearWarp(0.0, 1.0).kind, 'linear')
        self.assertEqual(synthesize(1.0, 0.5).to_dict()['kind'], 'cone')
        with self.assertRaises(PreconditionError):
            warping_class('spline')
        with self.assertRaises(PreconditionError):
            WarpingDescriptor({'kind': 'spline', 'delta': 1.0}).build()

    def test_schema_rows(self):
        rows = schema_rows(document_class('ConeDescriptor'))
        self.assertEqual(rows[0][:2], ('warping', 'nested (WarpingDescriptor)'))
        self.assertEqual(rows[2][:2], ('t_max', 'float (length)'))
        self.assertTrue(all(not name.startswith('_') for name, _, _ in rows))

    def test_doc_schemas(self):
        os.makedirs(self._docs_path, 0o755, exist_ok=True)
        categories = {
            'descriptors': DocKind.descriptor,
            'reports': DocKind.report,
        }
        for category in categories:
            result = f'# {category.capitalize()}\n\n'
            for d in documents(categories[category]):
                name, doc = summary(d)
                result += f'\n## {name}\n{doc}\n\n'
                result += self.doc_schema_md(d)
            with open(os.path.join(self._docs_path, f'{category}.md'), 'w') as f:
                f.write(result)
