"""
Fusion systems over a finite p-group S.

A FusionSystem is realized by conjugation inside an ambient permutation
group A containing S: Hom_F(Q, R) is the set of maps x -> g x g^-1 with
g in A and gQg^-1 <= R, deduplicated by table and memoized per (Q, R).
ExplicitFusionSystem takes a hand-written morphism table instead; it exists
so is_fusion_system() has something that can fail.

Saturation follows the fully automized / receptive formulation: every
subgroup must be F-conjugate to one that is both.
"""

import os
from dataclasses import dataclass, field
from functools import cached_property

import sympy

import gcore
import mylog

log = mylog.get_logger(__name__, level=os.environ.get('LOGLEVEL', 'WARNING'))


# ============================================================================
# Systems
# ============================================================================


class FusionSystem:
    """F_S(A): morphisms are conjugations by elements of A."""

    def __init__(self, S, p, ambient, name=''):
        if not sympy.isprime(p):
            raise ValueError(f"{p} is not prime")
        if not gcore.is_p_group(S, p):
            raise ValueError(f"S has order {len(S.elements)}, not a power of {p}")
        if not S.element_set <= ambient.element_set:
            raise ValueError("S is not contained in the ambient group")
        self.S = S
        self.p = p
        self.ambient = ambient
        self.name = name or f"F_S({getattr(ambient, 'name', '') or 'A'})"
        self._homs = {}

    @cached_property
    def subgroups(self):
        return gcore.all_subgroups(self.S)

    def hom(self, Q, R):
        key = (Q.elements, R.elements)
        found = self._homs.get(key)
        if found is None:
            found = self._homs.setdefault(key, gcore.homs_by_conjugation(self.ambient, Q, R))
        return found

    def __repr__(self):
        return f"FusionSystem({self.name}, p={self.p}, |S|={len(self.S.elements)})"


class ExplicitFusionSystem:
    """A morphism family given as a table {(Q, R): [GroupHom, ...]}.

    Pairs missing from the table have no morphisms. Only accepted as input
    to is_fusion_system(); nothing else guarantees the axioms hold.
    """

    def __init__(self, S, p, table, name='explicit'):
        self.S = S
        self.p = p
        self.name = name
        self._table = {}
        for (Q, R), homs in table.items():
            uniq = {f.images: f for f in homs}
            self._table[(Q.elements, R.elements)] = tuple(uniq[k] for k in sorted(uniq))

    @cached_property
    def subgroups(self):
        return gcore.all_subgroups(self.S)

    def hom(self, Q, R):
        return self._table.get((Q.elements, R.elements), ())


def realized(A, S, p, name=''):
    """F_S(A) for a p-subgroup S of A."""
    return FusionSystem(S, p, A, name=name)


def subsystem_from(F, H, name=''):
    """F_S(H) for S <= H <= A, a subsystem of F = F_S(A)."""
    if not F.S.element_set <= H.element_set:
        raise ValueError("the subsystem's ambient group does not contain S")
    if not H.element_set <= F.ambient.element_set:
        raise ValueError("the subsystem's ambient group is not inside the system's")
    return FusionSystem(F.S, F.p, H, name=name or f"F_S({getattr(H, 'name', '') or 'H'})")


def _check_in_S(F, *subs):
    for Q in subs:
        if not Q.element_set <= F.S.element_set:
            raise ValueError(f"{Q.label()} is not a subgroup of S")


# ============================================================================
# Morphism queries
# ============================================================================


def hom_F(F, Q, R):
    _check_in_S(F, Q, R)
    return F.hom(Q, R)


def iso_F(F, Q, R):
    if len(Q.elements) != len(R.elements):
        return ()
    return tuple(f for f in hom_F(F, Q, R) if gcore.is_surjective(f))


def aut_F(F, Q):
    return gcore.permutation_group_on(Q, hom_F(F, Q, Q), name=f"Aut_F({Q.label()})")


def aut_S(F, Q):
    return gcore.homs_by_conjugation(F.S, Q, Q)


def are_F_conjugate(F, Q, R):
    return bool(iso_F(F, Q, R))


def f_classes(F):
    """Partition of all subgroups of S into F-conjugacy classes."""
    classes = []
    for Q in F.subgroups:
        for cls in classes:
            if len(cls[0].elements) == len(Q.elements) and are_F_conjugate(F, cls[0], Q):
                cls.append(Q)
                break
        else:
            classes.append([Q])
    return classes


@dataclass
class FusionCheck:
    ok: bool
    violation: str = None
    witness: object = None

    def __bool__(self):
        return self.ok


def is_fusion_system(F):
    """Check the fusion-system axioms on every pair of subgroups of S."""
    subs = F.subgroups
    for Q in subs:
        for R in subs:
            for f in F.hom(Q, R):
                if not (f.domain == Q and set(f.images) <= R.element_set
                        and gcore.is_injective(f) and gcore.is_homomorphism(f)):
                    return FusionCheck(False, "not in Inj", f)
    for Q in subs:
        for R in subs:
            have = set(F.hom(Q, R))
            for f in gcore.homs_by_conjugation(F.S, Q, R):
                if f not in have:
                    return FusionCheck(False, "Hom_S not contained", f)
    by_elements = {Q.elements: Q for Q in subs}
    for Q in subs:
        for R in subs:
            for f in F.hom(Q, R):
                iso, im = gcore.is_iso_onto_image(f)
                im = by_elements[im.elements]
                if iso not in set(F.hom(Q, im)):
                    return FusionCheck(False, "not an isomorphism followed by an inclusion", f)
                if gcore.is_surjective(f) and gcore.inverse(f) not in set(F.hom(R, Q)):
                    return FusionCheck(False, "isomorphism without inverse", f)
                for Q2 in subs:
                    if Q2.element_set <= Q.element_set:
                        g = gcore.restrict(f, Q2)
                        if g not in set(F.hom(Q2, R)):
                            return FusionCheck(False, "not closed under restriction", g)
                for T in subs:
                    have = set(F.hom(Q, T))
                    for h in F.hom(R, T):
                        if gcore.compose(h, f) not in have:
                            return FusionCheck(False, "not closed under composition", (h, f))
    return FusionCheck(True)


# ============================================================================
# Saturation
# ============================================================================


def fully_automized(F, Q):
    """Aut_S(Q) is a Sylow p-subgroup of Aut_F(Q)."""
    _check_in_S(F, Q)
    auts = aut_S(F, Q)
    autf = set(F.hom(Q, Q))
    return len(auts) == gcore.p_part(len(autf), F.p) and set(auts) <= autf


def fully_normalized(F, Q):
    nq = len(gcore.normalizer(F.S, Q).elements)
    return all(nq >= len(gcore.normalizer(F.S, R).elements)
               for R in F.subgroups if R != Q and are_F_conjugate(F, Q, R))


def n_phi(F, phi):
    """{g in N_S(Q) : phi c_g phi^-1 in Aut_S(phi(Q))}."""
    Q = phi.domain
    iso, R = gcore.is_iso_onto_image(phi)
    _check_in_S(F, Q, R)
    if iso not in set(F.hom(Q, R)):
        raise ValueError("phi is not a morphism of the fusion system")
    back = gcore.inverse(iso)
    auts = {f.images for f in aut_S(F, R)}
    found = []
    for g in gcore.normalizer(F.S, Q).elements:
        gi = g.inverse()
        conj = tuple(iso(g * back(y) * gi) for y in R.elements)
        if conj in auts:
            found.append(g)
    return gcore.subgroup_from_elements(F.S, found)


def _extends(F, phi):
    N = n_phi(F, phi)
    for psi in F.hom(N, F.S):
        if all(psi(x) == y for x, y in zip(phi.domain.elements, phi.images)):
            return psi
    return None


def receptive_failure(F, R):
    """First F-isomorphism onto R that does not extend to its N_phi, or None."""
    _check_in_S(F, R)
    for Q in F.subgroups:
        for phi in iso_F(F, Q, R):
            if _extends(F, phi) is None:
                return phi
    return None


def receptive(F, R):
    return receptive_failure(F, R) is None


@dataclass
class ClassVerdict:
    representative: object
    members: list
    fully_automized: object = None
    receptive: object = None
    witness: object = None
    fully_normalized: object = None

    @property
    def ok(self):
        return self.witness is not None

    def to_dict(self):
        label = lambda Q: Q.label() if Q is not None else None
        return {
            'representative': label(self.representative),
            'order': len(self.representative.elements),
            'size': len(self.members),
            'fully_automized': label(self.fully_automized),
            'receptive': label(self.receptive),
            'witness': label(self.witness),
            'fully_normalized': label(self.fully_normalized),
        }


@dataclass
class SaturationReport:
    classes: list = field(default_factory=list)

    @property
    def saturated(self):
        return all(c.ok for c in self.classes)

    def __bool__(self):
        return self.saturated

    def failures(self):
        return [c for c in self.classes if not c.ok]

    def to_dict(self):
        return {'saturated': self.saturated, 'classes': [c.to_dict() for c in self.classes]}


def is_saturated(F):
    report = SaturationReport()
    for members in f_classes(F):
        verdict = ClassVerdict(members[0], members)
        for Q in members:
            fa = fully_automized(F, Q)
            if fa and verdict.fully_automized is None:
                verdict.fully_automized = Q
            if verdict.receptive is None or (fa and verdict.witness is None):
                if receptive(F, Q):
                    if verdict.receptive is None:
                        verdict.receptive = Q
                    if fa and verdict.witness is None:
                        verdict.witness = Q
            if verdict.witness is not None and verdict.receptive is not None:
                break
        nq = [len(gcore.normalizer(F.S, Q).elements) for Q in members]
        verdict.fully_normalized = members[nq.index(max(nq))]
        if not verdict.ok:
            log.info("%s: class of %s has no fully automized receptive member",
                     F.name, verdict.representative.label())
        report.classes.append(verdict)
    log.info("%s: saturated=%s over %d classes", F.name, report.saturated, len(report.classes))
    return report


# ============================================================================
# Subsystems
# ============================================================================


def _same_base(G, F):
    if G.p != F.p or G.S.elements != F.S.elements:
        raise ValueError("systems are not over the same p-group")


def is_subsystem(G, F):
    _same_base(G, F)
    for Q in F.subgroups:
        for R in F.subgroups:
            if not set(G.hom(Q, R)) <= set(F.hom(Q, R)):
                return False
    return True


def systems_equal(G, F):
    _same_base(G, F)
    return all(set(G.hom(Q, R)) == set(F.hom(Q, R)) for Q in F.subgroups for R in F.subgroups)


def first_difference(G, F):
    """(Q, R, phi) with phi in Hom_F(Q, R) but not Hom_G(Q, R), or None."""
    _same_base(G, F)
    for Q in F.subgroups:
        for R in F.subgroups:
            have = set(G.hom(Q, R))
            for f in F.hom(Q, R):
                if f not in have:
                    return Q, R, f
    return None
