import pytest
from hypothesis import HealthCheck, settings as hsettings

import catalog
import fusion
import gcore
import settings

# clean_settings is autouse and function scoped; it only resets overrides
hsettings.register_profile('repo', suppress_health_check=[HealthCheck.function_scoped_fixture])
hsettings.load_profile('repo')


@pytest.fixture(autouse=True)
def clean_settings():
    """Each test starts from the defaults (plus whatever MISLIN_* the shell sets)."""
    settings.reset()
    yield
    settings.reset()


@pytest.fixture(scope="session")
def groups():
    """Built-in catalog groups by name; element lists are computed once per session."""
    return {spec.name: catalog.build_group(spec) for spec in catalog.BUILTIN}


def _sub(G, *cycles):
    return gcore.subgroup_from_gens(G, [gcore.Permutation.parse_cycles(c, G.degree) for c in cycles])


@pytest.fixture(scope="session")
def sub():
    """sub(G, "(0 1 2)", ...) -> subgroup generated by the given cycles."""
    return _sub


@pytest.fixture(scope="session")
def s3_pair(groups):
    """(F_C3(C3), F_C3(S3)) at p = 3."""
    S3 = groups['S3']
    P = _sub(S3, "(0 1 2)")
    F = fusion.realized(S3, P, 3, name='F_C3(S3)')
    return fusion.subsystem_from(F, P, name='F_C3(C3)'), F


@pytest.fixture(scope="session")
def q8_pair(groups):
    """(F_Q8(Q8), F_Q8(SL(2,3))) at p = 2."""
    G = groups['SL(2,3)']
    P = gcore.sylow(G, 2)
    F = fusion.realized(G, P, 2, name='F_Q8(SL(2,3))')
    return fusion.subsystem_from(F, P, name='F_Q8(Q8)'), F


@pytest.fixture(scope="session")
def s4_d8(groups):
    """F_D8(S4) with D8 = <(0 1 2 3), (1 3)>."""
    S4 = groups['S4']
    return fusion.realized(S4, _sub(S4, "(0 1 2 3)", "(1 3)"), 2, name='F_D8(S4)')
