"""JSON codecs for posets, maps, complexes, presentations, representations
and categories.

Canonical output sorts every array and key, so encoding a decoded document
is a fixed point.
"""
import json
import logging
import os
from dataclasses import dataclass

from exitcalc.core.complex import SimplicialComplex, StratifiedComplex, face_key
from exitcalc.core.exit import ExitPresentation
from exitcalc.core.hocat import FinCategory
from exitcalc.core.homlin import Field, FieldMatrix
from exitcalc.core.poset import MonotoneMap, check_label, validate_poset
from exitcalc.core.rep import Representation
from exitcalc.errors import ExitCalcError, ValidationError

logger = logging.getLogger(__name__)

CORPUS_DIR = os.path.join(os.path.dirname(os.path.dirname(__file__)), 'corpus')
CORPUS_PREFIX = 'corpus:'


def dumps(data):
    return json.dumps(data, indent=2, sort_keys=True) + '\n'


def edge_key(x, y):
    return f'{x}->{y}'


def parse_edge_key(key):
    x, sep, y = key.partition('->')
    if not sep:
        raise ValidationError(f"edge key '{key}' is not of the form src->dst", anchor=key)
    return x, y


def _require(data, key, what):
    if not isinstance(data, dict):
        raise ValidationError(f'{what} must be a JSON object')
    if key not in data:
        raise ValidationError(f"{what} is missing key '{key}'", anchor=key)
    return data[key]


# ---------------------------------------------------------------------------
# Posets and maps
# ---------------------------------------------------------------------------

def encode_poset(poset):
    return {'elements': list(poset.elements), 'hasse': [list(edge) for edge in poset.hasse]}


def decode_poset(data):
    elements = _require(data, 'elements', 'poset')
    edges = data.get('hasse', [])
    for edge in edges:
        if not isinstance(edge, list) or len(edge) != 2:
            raise ValidationError(f'edge {edge!r} is not a pair', anchor=str(edge[0]) if edge else None)
    return validate_poset([check_label(str(x)) for x in elements], [(str(x), str(y)) for x, y in edges])


def encode_map(mapping):
    return {'target': encode_poset(mapping.target), 'assignment': mapping.assignment}


def decode_map(data, source):
    target = decode_poset(_require(data, 'target', 'map'))
    return MonotoneMap(source, target, {str(k): str(v) for k, v in _require(data, 'assignment', 'map').items()})


# ---------------------------------------------------------------------------
# Complexes and presentations
# ---------------------------------------------------------------------------

def _vertex(v):
    return check_label(str(v), atom=True)


def encode_complex(sc):
    data = {'strat_poset': encode_poset(sc.strat_poset), 'phi': sc.phi.assignment}
    if sc.complex is None:
        data['cells'] = encode_poset(sc.cells)
    else:
        data['vertices'] = sorted(sc.complex.vertices)
        data['faces'] = [list(face) for face in sc.complex.sorted_faces()]
    return data


def decode_complex(data):
    """Stratified complex in simplicial or cell form.

    Without ``strat_poset`` the complex carries its identity stratification.
    Simplicial input lists ``faces`` (closed under subsets) or ``facets``.
    """
    if 'cells' in data:
        cells = decode_poset(data['cells'])
        if 'strat_poset' not in data:
            return StratifiedComplex(cells, cells, MonotoneMap.identity(cells))
        strat_poset = decode_poset(data['strat_poset'])
        return StratifiedComplex.from_cells(cells, strat_poset, _require(data, 'phi', 'complex'))

    if 'facets' in data:
        complex = SimplicialComplex.from_facets([[_vertex(v) for v in f] for f in data['facets']])
        if 'vertices' in data and set(map(str, data['vertices'])) != complex.vertices:
            raise ValidationError('declared vertices differ from the vertices of the facets')
    else:
        complex = SimplicialComplex(
            [_vertex(v) for v in _require(data, 'vertices', 'complex')],
            [[str(v) for v in face] for face in _require(data, 'faces', 'complex')],
        )
    if 'strat_poset' not in data:
        return StratifiedComplex.identity(complex)
    strat_poset = decode_poset(data['strat_poset'])
    phi = {str(k): str(v) for k, v in _require(data, 'phi', 'complex').items()}
    unknown = sorted(set(phi) - {face_key(f) for f in complex.faces})
    if unknown:
        raise ValidationError(f"phi names '{unknown[0]}', which is not a face", anchor=unknown[0])
    return StratifiedComplex.from_complex(complex, strat_poset, phi)


def encode_presentation(pres):
    return {'shape': encode_poset(pres.shape), 'strat': encode_map(pres.strat)}


def decode_presentation(data):
    shape = decode_poset(_require(data, 'shape', 'presentation'))
    return ExitPresentation(shape, decode_map(_require(data, 'strat', 'presentation'), shape))


# ---------------------------------------------------------------------------
# Representations and categories
# ---------------------------------------------------------------------------

def encode_representation(rep):
    return {
        'pres': encode_presentation(rep.pres),
        'field': {'p': rep.field.p},
        'dims': dict(sorted(rep.dims.items())),
        'mats': {edge_key(x, y): m.tolist() for (x, y), m in sorted(rep.mats.items())},
    }


def decode_representation(data, pres=None):
    """Representation document; ``pres`` overrides or checks the embedded one."""
    embedded = decode_presentation(data['pres']) if 'pres' in data else None
    if pres is None:
        if embedded is None:
            raise ValidationError("representation is missing key 'pres'", anchor='pres')
        pres = embedded
    elif embedded is not None and embedded != pres:
        raise ValidationError('representation was built over a different presentation', anchor='pres')
    field = Field(_require(data, 'field', 'representation').get('p', 0))
    dims = {str(k): int(v) for k, v in _require(data, 'dims', 'representation').items()}
    mats = {}
    for key, rows in _require(data, 'mats', 'representation').items():
        x, y = parse_edge_key(key)
        if x not in dims or y not in dims:
            raise ValidationError(f"edge '{key}' joins elements without a dimension", anchor=key)
        try:
            mats[(x, y)] = FieldMatrix.from_rows(field, rows, (dims[y], dims[x]))
        except ExitCalcError as e:
            e.anchor = e.anchor or key
            raise
    return Representation(pres, field, dims, mats)


def encode_category(category):
    return {
        'objects': list(category.objects),
        'homs': {edge_key(x, y): list(fs) for (x, y), fs in sorted(category.homs.items()) if fs},
        'composition': sorted([g, f, h] for (g, f), h in category.composition.items()),
        'identities': dict(sorted(category.identities.items())),
    }


def decode_category(data):
    objects = tuple(check_label(str(x)) for x in _require(data, 'objects', 'category'))
    homs = {}
    for key, morphisms in _require(data, 'homs', 'category').items():
        homs[parse_edge_key(key)] = tuple(str(f) for f in morphisms)
    identities = {str(k): str(v) for k, v in _require(data, 'identities', 'category').items()}
    for x in objects:
        if identities.get(x) is None:
            raise ValidationError(f"object '{x}' has no identity", anchor=x)
        homs.setdefault((x, x), ())
        if identities[x] not in homs[(x, x)]:
            homs[(x, x)] = (identities[x],) + homs[(x, x)]
    composition = {}
    for triple in data.get('composition', []):
        if len(triple) != 3:
            raise ValidationError(f'composition entry {triple!r} is not [g, f, g o f]')
        g, f, h = (str(t) for t in triple)
        composition[(g, f)] = h
    category = FinCategory(objects, homs, _with_units(objects, homs, identities, composition), identities)
    problems = category.check_axioms()
    if problems:
        raise ValidationError(f'not a category: {problems[0]}')
    return category


def _with_units(objects, homs, identities, composition):
    """Composites with identities are implied and may be left out."""
    composition = dict(composition)
    for (x, y), morphisms in homs.items():
        for f in morphisms:
            composition.setdefault((f, identities[x]), f)
            composition.setdefault((identities[y], f), f)
    return composition


def kind_of(data):
    if not isinstance(data, dict):
        raise ValidationError('document must be a JSON object')
    if 'objects' in data:
        return 'category'
    if 'mats' in data:
        return 'representation'
    if 'shape' in data:
        return 'presentation'
    if 'cells' in data or 'faces' in data or 'facets' in data:
        return 'complex'
    if 'elements' in data:
        return 'poset'
    raise ValidationError('cannot tell what kind of document this is')


# ---------------------------------------------------------------------------
# Documents on disk
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Document:
    path: str
    text: str
    data: object

    def line_of(self, anchor):
        """First line mentioning ``anchor`` as a JSON string, else 1."""
        if anchor is None:
            return 1
        needle = json.dumps(str(anchor))
        for number, line in enumerate(self.text.splitlines(), start=1):
            if needle in line:
                return number
        return 1

    def locate(self, error):
        if error.location is None:
            error.located(self.path, self.line_of(error.anchor))
        return error

    def decode(self, decoder, *args):
        try:
            return decoder(self.data, *args)
        except ExitCalcError as e:
            raise self.locate(e)


def corpus_names():
    return sorted(name[:-len('.json')] for name in os.listdir(CORPUS_DIR) if name.endswith('.json'))


def resolve(ref):
    if ref.startswith(CORPUS_PREFIX):
        name = ref[len(CORPUS_PREFIX):]
        path = os.path.join(CORPUS_DIR, name if name.endswith('.json') else name + '.json')
        if not os.path.exists(path):
            raise ValidationError(f"no bundled example named '{name}'", anchor=name)
        return path
    return ref


def load_document(ref):
    path = resolve(ref)
    try:
        with open(path, encoding='utf-8') as handle:
            text = handle.read()
    except OSError as e:
        raise ValidationError(f'cannot read {ref}: {e.strerror}').located(ref, 1)
    except UnicodeDecodeError as e:
        raise ValidationError(f'cannot read {ref}: not UTF-8 text (byte {e.start}: {e.reason})').located(path, 1)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError(f'invalid JSON: {e.msg}').located(path, e.lineno)
    logger.debug('loaded document', extra={'path': path})
    return Document(path, text, data)
