"""
Control of fusion on elementary abelian subgroups.

Compares a subsystem G <= F over the same p-group: whether G already has
every F-morphism between elementary abelian subgroups, the resulting Mislin
verdict (for p odd, control on elementary abelians forces G = F), and the
index data of the Quillen stratification: F-classes of elementary abelian
subgroups with their automizers W_F(E).
"""

import os
from dataclasses import dataclass, field

import sympy

import fusion
import gcore
import mylog

log = mylog.get_logger(__name__, level=os.environ.get('LOGLEVEL', 'WARNING'))


@dataclass
class CheckResult:
    ok: bool
    witness: object = None

    def __bool__(self):
        return self.ok

    def to_dict(self):
        return {'ok': self.ok, 'witness': gcore.describe(self.witness)}


def is_elementary_abelian(Q, p):
    return gcore.is_abelian(Q) and all(gcore.power(x, p).is_identity() for x in Q.elements)


def elementary_abelians(F):
    """Elementary abelian subgroups of S, the trivial subgroup included."""
    return [Q for Q in F.subgroups if is_elementary_abelian(Q, F.p)]


def _require_subsystem(Gsys, Fsys):
    if not fusion.is_subsystem(Gsys, Fsys):
        raise ValueError(f"{Gsys.name} is not a subsystem of {Fsys.name}")


def controls_elementary_fusion(Gsys, Fsys):
    """Hom_G(E1, E2) = Hom_F(E1, E2) for all elementary abelian E1, E2."""
    _require_subsystem(Gsys, Fsys)
    elems = elementary_abelians(Fsys)
    for E1 in elems:
        for E2 in elems:
            have = set(Gsys.hom(E1, E2))
            for f in Fsys.hom(E1, E2):
                if f not in have:
                    return CheckResult(False, (E1, E2, f))
    return CheckResult(True)


@dataclass
class MislinVerdict:
    p: int
    controls_elem: bool
    systems_equal: bool
    consistent_with_theorem: bool
    witness: object = None
    saturated: dict = field(default_factory=dict)

    @property
    def asserted(self):
        return self.p % 2 == 1

    def to_dict(self):
        return {
            'p': self.p,
            'controls_elem': self.controls_elem,
            'systems_equal': self.systems_equal,
            'consistent_with_theorem': self.consistent_with_theorem,
            'theorem_asserted': self.asserted,
            'saturated': dict(self.saturated),
            'witness': gcore.describe(self.witness),
        }


def mislin_verdict(Gsys, Fsys, require_saturated=True):
    """Evaluate control and equality of G <= F against Mislin's theorem.

    For odd p the theorem predicts control <=> equality. For p = 2 the
    outcome is only recorded. Equality always implies control; a run where
    it does not is inconsistent at every prime.
    """
    _require_subsystem(Gsys, Fsys)
    saturated = {}
    if require_saturated:
        for label, sys_ in (('subsystem', Gsys), ('system', Fsys)):
            saturated[label] = fusion.is_saturated(sys_).saturated
            if not saturated[label]:
                raise ValueError(f"{sys_.name} is not saturated")
    control = controls_elementary_fusion(Gsys, Fsys)
    equal = fusion.systems_equal(Gsys, Fsys)
    consistent = not (equal and not control.ok)
    if Fsys.p % 2 == 1:
        consistent = consistent and (control.ok == equal)
    witness = control.witness
    if witness is None and not equal:
        witness = fusion.first_difference(Gsys, Fsys)
    verdict = MislinVerdict(Fsys.p, control.ok, equal, consistent, witness, saturated)
    log.info("mislin %s <= %s: control=%s equal=%s consistent=%s",
             Gsys.name, Fsys.name, control.ok, equal, consistent)
    return verdict


def weyl_group(F, E):
    """W_F(E) = Aut_F(E) for an elementary abelian E."""
    if not is_elementary_abelian(E, F.p):
        raise ValueError(f"{E.label()} is not elementary abelian")
    return fusion.aut_F(F, E)


@dataclass
class StratumRow:
    representative: object
    members: list
    automizer_order: int
    rank: int

    def to_dict(self):
        return {
            'representative': self.representative.label(),
            'rank': self.rank,
            'class_size': len(self.members),
            'automizer_order': self.automizer_order,
        }


@dataclass
class ElementaryClassTable:
    rows: list

    def to_dict(self):
        return [r.to_dict() for r in self.rows]


def strata_skeleton(F):
    """One row per F-class of elementary abelian subgroups, with |W_F(E)|."""
    rows = []
    for E in elementary_abelians(F):
        for row in rows:
            if len(row.representative.elements) == len(E.elements) \
                    and fusion.are_F_conjugate(F, row.representative, E):
                row.members.append(E)
                break
        else:
            rank = sympy.multiplicity(F.p, len(E.elements)) if len(E.elements) > 1 else 0
            rows.append(StratumRow(E, [E], weyl_group(F, E).order, rank))
    return ElementaryClassTable(rows)


def aut_via_normalizer(A, E):
    """N_A(E)/C_A(E) acting on E by conjugation, as permutations of E."""
    N = gcore.normalizer(A, E)
    C = gcore.centralizer(A, E)
    homs = {gcore.conjugation_hom(g, E, E) for g in N.elements}
    if len(homs) * len(C.elements) != len(N.elements):
        raise RuntimeError("conjugation action disagrees with |N|/|C|")
    return gcore.permutation_group_on(E, homs, name=f"N/C({E.label()})")


def transport_classes(Gsys, Fsys):
    """F-isomorphic elementary abelians are G-isomorphic (needs control)."""
    if not controls_elementary_fusion(Gsys, Fsys):
        raise ValueError("transport_classes needs control on elementary abelians")
    elems = elementary_abelians(Fsys)
    for i, E1 in enumerate(elems):
        for E2 in elems[i:]:
            if fusion.are_F_conjugate(Fsys, E1, E2) and not fusion.are_F_conjugate(Gsys, E1, E2):
                return CheckResult(False, (E1, E2))
    return CheckResult(True)


def automizer_equality(Gsys, Fsys):
    """Aut_G(E) = Aut_F(E) for every elementary abelian E."""
    _require_subsystem(Gsys, Fsys)
    for E in elementary_abelians(Fsys):
        if set(Gsys.hom(E, E)) != set(Fsys.hom(E, E)):
            return CheckResult(False, E)
    return CheckResult(True)


def decomposition_check(Gsys, Fsys):
    """Every F-morphism phi: E1 -> E2 factors through G.

    Splits phi = incl o phi1 and looks for a G-isomorphism a: E1 -> phi(E1)
    with a^-1 o phi1 in Aut_G(E1); then phi = incl o a o (a^-1 o phi1) is a
    G-morphism.
    """
    if not controls_elementary_fusion(Gsys, Fsys):
        raise ValueError("decomposition_check needs control on elementary abelians")
    elems = elementary_abelians(Fsys)
    by_elements = {E.elements: E for E in elems}
    for E1 in elems:
        aut_g = set(Gsys.hom(E1, E1))
        for E2 in elems:
            for phi in Fsys.hom(E1, E2):
                phi1, im = gcore.is_iso_onto_image(phi)
                im = by_elements[im.elements]
                if not any(gcore.compose(gcore.inverse(a), phi1) in aut_g
                           for a in fusion.iso_F(Gsys, E1, im)):
                    return CheckResult(False, phi)
                if phi not in set(Gsys.hom(E1, E2)):
                    return CheckResult(False, phi)
    return CheckResult(True)


def local_subsystem(A, P, R, p):
    """F_P(N_A(R)) <= F_P(A) for R normal in P with N_A(P) <= N_A(R)."""
    if not R.element_set <= P.element_set:
        raise ValueError(f"{R.label()} is not inside P")
    if len(gcore.normalizer(P, R).elements) != len(P.elements):
        raise ValueError(f"{R.label()} is not normal in P")
    NR = gcore.normalizer(A, R)
    if not gcore.normalizer(A, P).element_set <= NR.element_set:
        raise ValueError(f"N(P) is not contained in N({R.label()})")
    return fusion.FusionSystem(P, p, NR, name=f"F_P(N({R.label()}))")
