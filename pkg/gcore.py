"""
Permutation groups with explicit element lists.

Elements are Permutation values (0-based image tuples). Groups cache the
closure of their generators, sorted by image tuple so every listing is
reproducible. Subgroups are element sets inside an ambient group and
homomorphisms are full element-map tables, which makes equality of fusion
morphisms a tuple comparison.

Product convention: (g * h)(i) = g(h(i)), i.e. h acts first. Conjugation is
c_g(x) = g x g^-1.
"""

import itertools
import math
import os
import re
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property

import sympy

import mylog
import settings

log = mylog.get_logger(__name__, level=os.environ.get('LOGLEVEL', 'WARNING'))


# ============================================================================
# Elements
# ============================================================================


@dataclass(frozen=True, order=True)
class Permutation:
    images: tuple

    def __post_init__(self):
        if sorted(self.images) != list(range(len(self.images))):
            raise ValueError(f"not a bijection: {list(self.images)}")

    @classmethod
    def _trusted(cls, images):
        # skips validation; only for products of valid permutations
        p = object.__new__(cls)
        object.__setattr__(p, 'images', images)
        return p

    @classmethod
    def identity(cls, degree):
        return cls._trusted(tuple(range(degree)))

    @classmethod
    def parse_cycles(cls, text, degree):
        """Parse cycle notation such as "(0 1 2)(3 4)"; "()" is the identity."""
        images = list(range(degree))
        for cyc in re.findall(r'\(([^()]*)\)', text):
            pts = [int(t) for t in re.split(r'[\s,]+', cyc.strip()) if t]
            if len(set(pts)) != len(pts):
                raise ValueError(f"repeated point in cycle ({cyc})")
            for a, b in zip(pts, pts[1:] + pts[:1]):
                if not 0 <= a < degree:
                    raise ValueError(f"point {a} outside degree {degree}")
                images[a] = b
        return cls(tuple(images))

    @property
    def degree(self):
        return len(self.images)

    def __mul__(self, other):
        if len(other.images) != len(self.images):
            raise ValueError(f"degree mismatch: {self.degree} vs {other.degree}")
        s = self.images
        return Permutation._trusted(tuple(s[i] for i in other.images))

    def inverse(self):
        inv = [0] * len(self.images)
        for i, j in enumerate(self.images):
            inv[j] = i
        return Permutation._trusted(tuple(inv))

    def is_identity(self):
        return all(i == j for i, j in enumerate(self.images))

    def cycles(self):
        seen, out = set(), []
        for start in range(self.degree):
            if start in seen or self.images[start] == start:
                continue
            cyc, i = [], start
            while i not in seen:
                seen.add(i)
                cyc.append(i)
                i = self.images[i]
            out.append(tuple(cyc))
        return out

    def __str__(self):
        cyc = self.cycles()
        return ''.join('(' + ' '.join(map(str, c)) + ')' for c in cyc) or '()'


def power(x, k):
    result = Permutation.identity(x.degree)
    base = x if k >= 0 else x.inverse()
    k = abs(k)
    while k:
        if k & 1:
            result = result * base
        base = base * base
        k >>= 1
    return result


def order(x):
    n, y = 1, x
    while not y.is_identity():
        y = y * x
        n += 1
    return n


def closure(generators, degree=None):
    """Sorted tuple of all elements of the group generated by generators."""
    gens = list(generators)
    degrees = {g.degree for g in gens}
    if len(degrees) > 1:
        raise ValueError(f"generators of mixed degree: {sorted(degrees)}")
    if gens:
        degree = gens[0].degree
    elif degree is None:
        degree = 0
    cap = settings.current().max_elements
    e = Permutation.identity(degree)
    seen = {e}
    queue = deque([e])
    while queue:
        x = queue.popleft()
        for g in gens:
            y = x * g
            if y not in seen:
                seen.add(y)
                if len(seen) > cap:
                    raise settings.CapExceeded('group closure', len(seen), cap)
                queue.append(y)
    return tuple(sorted(seen))


# ============================================================================
# Groups and subgroups
# ============================================================================


class FiniteGroup:
    """A permutation group given by generators; elements computed once."""

    def __init__(self, generators, name='', degree=None):
        self.generators = tuple(generators)
        if self.generators:
            degree = self.generators[0].degree
        self.degree = degree or 0
        self.name = name

    @cached_property
    def elements(self):
        els = closure(self.generators, self.degree)
        log.debug("closure of %s: %d elements", self.name or 'group', len(els))
        return els

    @cached_property
    def element_set(self):
        return frozenset(self.elements)

    @property
    def order(self):
        return len(self.elements)

    @property
    def identity(self):
        return Permutation.identity(self.degree)

    def __contains__(self, x):
        return x in self.element_set

    def whole(self):
        return Subgroup(self, self.elements, self.generators)

    def __repr__(self):
        return f"FiniteGroup({self.name or '?'}, degree={self.degree})"


@dataclass(frozen=True)
class Subgroup:
    ambient: FiniteGroup = field(compare=False, hash=False, repr=False)
    elements: tuple
    generators: tuple = field(default=(), compare=False, hash=False, repr=False)

    @cached_property
    def element_set(self):
        return frozenset(self.elements)

    @cached_property
    def index(self):
        return {x: i for i, x in enumerate(self.elements)}

    @property
    def order(self):
        return len(self.elements)

    @property
    def identity(self):
        return self.ambient.identity

    @property
    def degree(self):
        return self.ambient.degree

    def __contains__(self, x):
        return x in self.element_set

    def __len__(self):
        return len(self.elements)

    def __le__(self, other):
        return self.element_set <= _element_set(other)

    def __lt__(self, other):
        return self.element_set < _element_set(other)

    def label(self):
        gens = self.generators or _few_generators(self.elements)
        gens = ', '.join(str(g) for g in gens if not g.is_identity())
        return f"<{gens}>" if gens else "1"


def _element_set(G):
    return G.element_set


def _ambient(G):
    return G if isinstance(G, FiniteGroup) else G.ambient


def subgroup_from_gens(G, gens):
    A = _ambient(G)
    gens = tuple(gens)
    for g in gens:
        if g not in A:
            raise ValueError(f"{g} is not in {A.name or 'the ambient group'}")
    return Subgroup(A, closure(gens, A.degree), gens)


def subgroup_from_elements(G, elements, gens=()):
    return Subgroup(_ambient(G), tuple(sorted(elements)), tuple(gens))


def trivial_subgroup(G):
    A = _ambient(G)
    return Subgroup(A, (A.identity,), ())


def is_subgroup(Q, R):
    return Q.element_set <= R.element_set


def is_abelian(Q):
    gens = Q.generators or Q.elements
    return all(a * b == b * a for a, b in itertools.combinations(gens, 2))


def exponent(Q):
    return math.lcm(*[order(x) for x in Q.elements])


def is_p_group(Q, p):
    n = len(Q.elements)
    return n == p ** sympy.multiplicity(p, n)


def p_part(n, p):
    return p ** sympy.multiplicity(p, n)


def center(Q):
    return subgroup_from_elements(Q, [z for z in Q.elements if all(z * x == x * z for x in Q.elements)])


def abelian_invariants(Q):
    """Invariants of an abelian group as prime powers, e.g. [2, 4]."""
    invariants = []
    for q in sorted(sympy.factorint(len(Q.elements))):
        # n_k = #{x in Q : x^(q^k) = 1} = q^(sum_i min(k, e_i))
        counts, k = [1], 1
        while True:
            nk = sum(1 for x in Q.elements if power(x, q ** k).is_identity())
            counts.append(nk)
            if nk == counts[-2] and k > 1:
                break
            k += 1
        logs = [sympy.multiplicity(q, c) if c > 1 else 0 for c in counts]
        ranks = [logs[i] - logs[i - 1] for i in range(1, len(logs))]
        # ranks[k-1] = number of cyclic factors of order >= q^k
        for k in range(1, len(ranks) + 1):
            nxt = ranks[k] if k < len(ranks) else 0
            invariants.extend([q ** k] * (ranks[k - 1] - nxt))
    return sorted(invariants)


def structure_label(Q):
    """Human label used in reports; not an isomorphism test."""
    n = len(Q.elements)
    if n == 1:
        return '1'
    if is_abelian(Q):
        return ' x '.join(f"C{m}" for m in sorted(abelian_invariants(Q), reverse=True))
    return f"nonabelian({n})"


# ============================================================================
# Conjugation, normalizers, centralizers
# ============================================================================


def conjugate(g, Q):
    """{g q g^-1 : q in Q} as a subgroup of Q's ambient group."""
    if g not in Q.ambient:
        raise ValueError(f"{g} is not in the ambient group")
    gi = g.inverse()
    return Subgroup(Q.ambient, tuple(sorted(g * q * gi for q in Q.elements)),
                    tuple(g * h * gi for h in Q.generators))


def _check_inside(Q, G):
    if not Q.element_set <= _element_set(G):
        raise ValueError("subgroup is not contained in the group")


def normalizer(G, Q):
    _check_inside(Q, G)
    qs = Q.element_set
    gens = Q.generators or Q.elements
    found = []
    for g in G.elements:
        gi = g.inverse()
        if all(g * h * gi in qs for h in gens):
            found.append(g)
    return subgroup_from_elements(G, found, _few_generators(found))


def centralizer(G, Q):
    _check_inside(Q, G)
    gens = Q.generators or Q.elements
    found = [g for g in G.elements if all(g * h == h * g for h in gens)]
    return subgroup_from_elements(G, found, _few_generators(found))


def _few_generators(elements):
    """Greedy generating set, deterministic in the element order."""
    if not elements:
        return ()
    degree = elements[0].degree
    gens, span = [], {Permutation.identity(degree)}
    target = len(elements)
    for x in elements:
        if x in span:
            continue
        gens.append(x)
        span = set(closure(gens, degree))
        if len(span) == target:
            break
    return tuple(gens)


# ============================================================================
# Sylow subgroups and subgroup lattices of p-groups
# ============================================================================


def sylow(G, p):
    """A Sylow p-subgroup grown from a p-element of maximal order."""
    if not sympy.isprime(p):
        raise ValueError(f"{p} is not prime")
    target = p_part(len(G.elements), p)
    if target == 1:
        return trivial_subgroup(G)
    p_elements = [(order(x), x) for x in G.elements if not x.is_identity()]
    p_elements = [(o, x) for o, x in p_elements if p_part(o, p) == o]
    best = max(o for o, _ in p_elements)
    start = next(x for o, x in p_elements if o == best)
    P = subgroup_from_gens(G, [start])
    while len(P.elements) < target:
        N = normalizer(G, P)
        P = _extend_by_p_element(G, N, P, p)
        log.debug("sylow(%d): grew to order %d", p, len(P.elements))
    return P


def _extend_by_p_element(G, N, P, p):
    for g in N.elements:
        if g in P:
            continue
        k, y = 1, g
        while y not in P:
            y = y * g
            k += 1
        if p_part(k, p) == k:
            h = power(g, k // p)
            return subgroup_from_gens(G, P.generators + (h,))
    raise RuntimeError("normalizer quotient has no element of order p")


def all_subgroups(P):
    """Every subgroup of the p-group P, trivial first, sorted by (order, elements)."""
    n = len(P.elements)
    limit = settings.current().max_subgroup_order
    if n > limit:
        raise settings.CapExceeded('subgroup enumeration', n, limit)
    if n > 1 and len(sympy.factorint(n)) != 1:
        raise ValueError(f"order {n} is not a prime power")
    start = trivial_subgroup(P)
    seen = {start.elements: start}
    queue = deque([start])
    while queue:
        H = queue.popleft()
        for x in P.elements:
            if x in H:
                continue
            K = subgroup_from_gens(P, H.generators + (x,))
            if K.elements not in seen:
                seen[K.elements] = K
                queue.append(K)
    subs = sorted(seen.values(), key=lambda K: (len(K.elements), K.elements))
    log.debug("all_subgroups: %d subgroups of a group of order %d", len(subs), n)
    return subs


# ============================================================================
# Homomorphisms as element tables
# ============================================================================


@dataclass(frozen=True)
class GroupHom:
    domain: Subgroup
    codomain: Subgroup = field(compare=False, hash=False)
    images: tuple

    @cached_property
    def table(self):
        return dict(zip(self.domain.elements, self.images))

    def __call__(self, x):
        return self.table[x]

    def sort_key(self):
        return (self.domain.elements, self.images)

    def __repr__(self):
        moved = [f"{x}->{y}" for x, y in zip(self.domain.elements, self.images) if x != y]
        return f"GroupHom({', '.join(moved) or 'inclusion'})"


def make_hom(domain, codomain, mapping):
    """GroupHom from a dict or callable; images must land in codomain."""
    get = mapping.get if isinstance(mapping, dict) else mapping
    images = []
    for x in domain.elements:
        y = get(x)
        if y is None:
            raise ValueError(f"hom table incomplete at {x}")
        images.append(y)
    if not set(images) <= codomain.element_set:
        raise ValueError("hom images leave the codomain")
    return GroupHom(domain, codomain, tuple(images))


def identity_hom(Q):
    return GroupHom(Q, Q, Q.elements)


def inclusion(Q, R):
    if not Q.element_set <= R.element_set:
        raise ValueError("inclusion needs Q <= R")
    return GroupHom(Q, R, Q.elements)


def conjugation_hom(g, Q, R):
    gi = g.inverse()
    return make_hom(Q, R, lambda x: g * x * gi)


def image(f):
    return subgroup_from_elements(f.codomain, set(f.images),
                                  tuple(f(h) for h in f.domain.generators))


def is_injective(f):
    return len(set(f.images)) == len(f.images)


def is_homomorphism(f):
    t = f.table
    gens = f.domain.generators or f.domain.elements
    return all(t[x * y] == t[x] * t[y] for x in f.domain.elements for y in gens)


def is_surjective(f):
    return set(f.images) == f.codomain.element_set


def compose(f, g):
    """f after g."""
    if not set(g.images) <= f.domain.element_set:
        raise ValueError("compose: image of g is not inside the domain of f")
    t = f.table
    return GroupHom(g.domain, f.codomain, tuple(t[y] for y in g.images))


def restrict(f, Q):
    if not Q.element_set <= f.domain.element_set:
        raise ValueError("restrict: subgroup is not inside the domain")
    t = f.table
    return GroupHom(Q, f.codomain, tuple(t[x] for x in Q.elements))


def corestrict(f, R):
    if not set(f.images) <= R.element_set:
        raise ValueError("corestrict: image is not inside the new codomain")
    return GroupHom(f.domain, R, f.images)


def is_iso_onto_image(f):
    """Split f as (isomorphism onto its image, image); f = incl o iso."""
    if not is_injective(f):
        raise ValueError("not injective")
    im = image(f)
    return GroupHom(f.domain, im, f.images), im


def inverse(f):
    if not (is_injective(f) and is_surjective(f)):
        raise ValueError("inverse needs an isomorphism")
    back = dict(zip(f.images, f.domain.elements))
    return GroupHom(f.codomain, f.domain, tuple(back[y] for y in f.codomain.elements))


def homs_by_conjugation(A, Q, R):
    """Distinct restrictions c_g|Q with g in A and gQg^-1 <= R, sorted by table."""
    rs = R.element_set
    found = {}
    for g in A.elements:
        gi = g.inverse()
        imgs = tuple(g * x * gi for x in Q.elements)
        if imgs in found or not all(y in rs for y in imgs):
            continue
        found[imgs] = GroupHom(Q, R, imgs)
    return tuple(found[k] for k in sorted(found))


def describe(obj):
    """Plain (YAML/JSON-ready) rendering of subgroups, homs and tuples of them."""
    if obj is None or isinstance(obj, (bool, int, float, str)):
        return obj
    if isinstance(obj, Permutation):
        return str(obj)
    if isinstance(obj, Subgroup):
        return obj.label()
    if isinstance(obj, GroupHom):
        gens = obj.domain.generators or _few_generators(obj.domain.elements)
        return {
            'domain': obj.domain.label(),
            'codomain': obj.codomain.label(),
            'images': {str(g): str(obj(g)) for g in gens if not g.is_identity()},
        }
    if isinstance(obj, (tuple, list)):
        return [describe(o) for o in obj]
    return str(obj)


def permutation_group_on(Q, homs, name=''):
    """Automorphisms of Q as permutations of the indices of Q.elements."""
    idx = Q.index
    perms = sorted({Permutation(tuple(idx[f(x)] for x in Q.elements)) for f in homs})
    return FiniteGroup(perms, name=name, degree=len(Q.elements))
