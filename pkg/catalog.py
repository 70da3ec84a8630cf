"""
Group catalog: permutation generators for the groups scenarios refer to.

A catalog file is YAML with a version header:

    format: 1
    groups:
      - name: S3
        degree: 3
        generators: [[1, 0, 2], [1, 2, 0]]

Images are 0-based. The built-in catalog is always available; groups from
a file are added to it and may shadow a built-in name.
"""

import hashlib
import os
from dataclasses import dataclass

import yaml

import gcore
import mylog

log = mylog.get_logger(__name__, level=os.environ.get('LOGLEVEL', 'WARNING'))

FORMAT_VERSION = 1


class CatalogError(ValueError):
    """Parse or validation error in a catalog or scenario file."""

    def __init__(self, message, path=None, line=None, field=None):
        self.message, self.path, self.line, self.field = message, path, line, field
        where = ':'.join(str(x) for x in (path, line) if x is not None)
        prefix = f"{where}: " if where else ''
        super().__init__(f"{prefix}{field + ': ' if field else ''}{message}")


@dataclass(frozen=True)
class GroupSpec:
    name: str
    degree: int
    generators: tuple

    def to_dict(self):
        return {'name': self.name, 'degree': self.degree,
                'generators': [list(g) for g in self.generators]}


# SL(2,3) acts on the nonzero vectors of GF(3)^2 listed as
# (0,1) (0,2) (1,0) (1,1) (1,2) (2,0) (2,1) (2,2); generators [[1,1],[0,1]], [[0,-1],[1,0]].
# Q8 is the left regular representation on 1,-1,i,-i,j,-j,k,-k.
_BUILTIN = [
    ('C2', 2, [[1, 0]]),
    ('C3', 3, [[1, 2, 0]]),
    ('C4', 4, [[1, 2, 3, 0]]),
    ('C5', 5, [[1, 2, 3, 4, 0]]),
    ('C2xC2', 4, [[1, 0, 2, 3], [0, 1, 3, 2]]),
    ('C3xC3', 6, [[1, 2, 0, 3, 4, 5], [0, 1, 2, 4, 5, 3]]),
    ('S3', 3, [[1, 0, 2], [1, 2, 0]]),
    ('S4', 4, [[1, 0, 2, 3], [1, 2, 3, 0]]),
    ('A4', 4, [[1, 2, 0, 3], [0, 2, 3, 1]]),
    ('D8', 4, [[1, 2, 3, 0], [0, 3, 2, 1]]),
    ('Q8', 8, [[2, 3, 1, 0, 6, 7, 5, 4], [4, 5, 7, 6, 1, 0, 2, 3]]),
    ('SL(2,3)', 8, [[3, 7, 2, 6, 1, 5, 0, 4], [5, 2, 0, 6, 3, 1, 7, 4]]),
    ('C7:C3', 7, [[1, 2, 3, 4, 5, 6, 0], [0, 2, 4, 6, 1, 3, 5]]),
]

BUILTIN = [GroupSpec(name, degree, tuple(tuple(g) for g in gens)) for name, degree, gens in _BUILTIN]


def node_lines(text, key):
    """1-based start line of each item of the top-level sequence under key."""
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError:
        return []
    if not isinstance(root, yaml.MappingNode):
        return []
    for k, v in root.value:
        if k.value == key and isinstance(v, yaml.SequenceNode):
            return [item.start_mark.line + 1 for item in v.value]
    return []


def parse_yaml(text, path=None):
    """safe_load with the error position folded into a CatalogError."""
    try:
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as e:
        line = e.problem_mark.line + 1 if e.problem_mark else None
        raise CatalogError(str(e.problem), path=path, line=line) from e
    except yaml.YAMLError as e:
        raise CatalogError(str(e), path=path) from e
    if not isinstance(data, dict):
        raise CatalogError("top level must be a mapping", path=path)
    if data.get('format') != FORMAT_VERSION:
        raise CatalogError(f"unsupported format {data.get('format')!r}, expected {FORMAT_VERSION}",
                           path=path, field='format')
    return data


def parse_images(raw, degree, path=None, line=None, field='generators'):
    """A permutation from a list of 0-based images, validated against degree."""
    if not isinstance(raw, list) or not all(isinstance(i, int) and not isinstance(i, bool) for i in raw):
        raise CatalogError(f"expected a list of integers, got {raw!r}", path, line, field)
    if len(raw) != degree:
        raise CatalogError(f"{len(raw)} images for degree {degree}", path, line, field)
    try:
        return gcore.Permutation(tuple(raw))
    except ValueError as e:
        raise CatalogError(str(e), path, line, field) from e


def parse_specs(data, path=None, lines=()):
    entries = data.get('groups')
    if not isinstance(entries, list):
        raise CatalogError("'groups' must be a list", path=path, field='groups')
    specs, seen = [], set()
    for i, entry in enumerate(entries):
        line = lines[i] if i < len(lines) else None
        if not isinstance(entry, dict):
            raise CatalogError("group entry must be a mapping", path, line)
        unknown = set(entry) - {'name', 'degree', 'generators'}
        if unknown:
            raise CatalogError(f"unknown field(s) {sorted(unknown)}", path, line)
        name, degree, gens = entry.get('name'), entry.get('degree'), entry.get('generators')
        if not isinstance(name, str) or not name:
            raise CatalogError("missing or empty", path, line, 'name')
        if name in seen:
            raise CatalogError(f"duplicate name {name!r}", path, line, 'name')
        if not isinstance(degree, int) or isinstance(degree, bool) or degree < 1:
            raise CatalogError(f"expected a positive integer, got {degree!r}", path, line, 'degree')
        if not isinstance(gens, list):
            raise CatalogError("expected a list of image arrays", path, line, 'generators')
        perms = [parse_images(g, degree, path, line) for g in gens]
        seen.add(name)
        specs.append(GroupSpec(name, degree, tuple(p.images for p in perms)))
    return specs


def read_catalog(path=None, text=None):
    """Only the groups a catalog file defines, in file order."""
    if text is None:
        try:
            with open(path) as fd:
                text = fd.read()
        except OSError as e:
            raise CatalogError(e.strerror or str(e), path=path) from e
    specs = parse_specs(parse_yaml(text, path), path, node_lines(text, 'groups'))
    log.info("loaded %d group(s) from %s", len(specs), path or 'text')
    return specs


def load_catalog(path=None, text=None):
    """Built-in specs followed by the groups of a catalog file (if any)."""
    if path is None and text is None:
        return list(BUILTIN)
    specs = read_catalog(path, text)
    names = {s.name for s in specs}
    for spec in BUILTIN:
        if spec.name in names:
            log.warning("catalog %s shadows built-in group %s", path, spec.name)
    return [s for s in BUILTIN if s.name not in names] + specs


def dump_catalog(specs):
    """Canonical YAML: sorted keys, one flow-style list per generator."""
    doc = {'format': FORMAT_VERSION, 'groups': [s.to_dict() for s in specs]}
    return yaml.safe_dump(doc, sort_keys=True, default_flow_style=None)


def catalog_hash(specs):
    return hashlib.sha256(dump_catalog(specs).encode('utf-8')).hexdigest()


def by_name(specs):
    return {s.name: s for s in specs}


def build_group(spec):
    gens = [gcore.Permutation(tuple(g)) for g in spec.generators]
    return gcore.FiniteGroup(gens, name=spec.name, degree=spec.degree)
