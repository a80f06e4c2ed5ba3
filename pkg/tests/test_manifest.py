import json
import logging

import numpy as np
import pytest
import scipy.io
import scipy.sparse as sp

from pdhg_primal.enums.family_match_type import FamilyMatchType
from pdhg_primal.enums.resolution_action import ResolutionAction
from pdhg_primal.errors import ManifestError
from pdhg_primal.services.catalog_loader import CatalogLoader
from pdhg_primal.services.distributed import ConsensusProblem
from pdhg_primal.services.family_resolver import FamilyResolver
from pdhg_primal.services.manifest_loader import ManifestLoader, parse_manifest
from pdhg_primal.services.operators import SparseMap
from pdhg_primal.services.problem import ConstrainedProblem
from pdhg_primal.services.prox import (BoxIndicator, L1Norm, QuadraticFunction, SeparableSum,
                                       StronglyConvexified)

CANONICAL = {"A": [[2.0]], "b": [2.0], "g": {"family": "quadratic"}}


def _write(tmp_path, data, name="manifest.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


def _error(data) -> ManifestError:
    with pytest.raises(ManifestError) as error:
        ManifestLoader().from_dict(data)
    return error.value


def test_inline_manifest(tmp_path):
    problem = parse_manifest(_write(tmp_path, dict(CANONICAL, fstar=0.0)))
    assert isinstance(problem, ConstrainedProblem)
    assert isinstance(problem.g, QuadraticFunction)
    assert problem.f_value(np.zeros(1)) == pytest.approx(2.0)
    assert problem.fstar == 0.0


def test_file_references_resolve_against_manifest_directory(tmp_path):
    data_dir = tmp_path / "data"
    data_dir.mkdir()
    scipy.io.mmwrite(str(data_dir / "A.mtx"), sp.csr_matrix(np.array([[1.0, 0.0, 2.0], [0.0, 3.0, 0.0]])))
    np.savetxt(data_dir / "b.txt", [1.0, 2.0])
    np.savetxt(data_dir / "w.txt", [0.1, 0.2, 0.3])
    problem = parse_manifest(_write(tmp_path, {
        "A": "data/A.mtx",
        "b": "data/b.txt",
        "g": {"family": "l1", "params": {"weight": "data/w.txt"}},
    }))
    assert isinstance(problem.A, SparseMap)
    assert problem.A.shape == (2, 3)
    np.testing.assert_allclose(problem.g.weight, [0.1, 0.2, 0.3])


def test_missing_file_names_field(tmp_path):
    with pytest.raises(ManifestError) as error:
        parse_manifest(_write(tmp_path, dict(CANONICAL, b="missing.txt")))
    assert error.value.field == "b"


def test_missing_b():
    error = _error({"A": [[1.0]], "g": {"family": "l1"}})
    assert error.field == "b"
    assert str(error).startswith("b: ")


def test_b_length_mismatch():
    assert _error(dict(CANONICAL, b=[1.0, 2.0])).field == "b"


def test_unknown_family_suggests_closest():
    error = _error(dict(CANONICAL, g={"family": "boxx"}))
    assert error.field == "g.family"
    assert "did you mean 'box'" in str(error)


def test_unrelated_family_lists_catalogue():
    error = _error(dict(CANONICAL, g={"family": "zzzzzzzz"}))
    assert "known families" in str(error)


def test_alias_family():
    problem = ManifestLoader().from_dict(dict(CANONICAL, g={"family": "Lasso", "params": {"weight": 0.5}}))
    assert isinstance(problem.g, L1Norm)
    np.testing.assert_allclose(problem.g.weight, [0.5])


def test_fuzzy_family_is_accepted_with_warning(caplog):
    with caplog.at_level(logging.WARNING):
        problem = ManifestLoader().from_dict(dict(CANONICAL, g={"family": "quadratc"}))
    assert isinstance(problem.g, QuadraticFunction)
    assert any("read as 'quadratic'" in message for message in caplog.messages)


def test_parameter_errors_carry_field_paths():
    assert _error(dict(CANONICAL, g={"family": "quadratic", "params": {"rho": "a"}})).field == \
        "g.params.rho"
    assert _error(dict(CANONICAL, g={"family": "quadratic", "params": {"center": [1.0, 2.0]}})).field == \
        "g.params.center"
    assert _error(dict(CANONICAL, g={"family": "point"})).field == "g.params.point"
    unknown = _error(dict(CANONICAL, g={"family": "l1", "params": {"radius": 1.0}}))
    assert unknown.field == "g.params"
    assert "radius" in str(unknown)


def test_composite_families():
    problem = ManifestLoader().from_dict({
        "A": [[1.0, 0.0, 1.0]],
        "b": [1.0],
        "g": {"family": "separable_sum", "params": {"blocks": [
            {"family": "box", "dimension": 2, "params": {"lower": 0.0, "upper": 1.0}},
            {"family": "elastic", "params": {"inner": {"family": "l1"}, "rho": 2.0}},
        ]}},
    })
    assert isinstance(problem.g, SeparableSum)
    assert isinstance(problem.g.blocks[0], BoxIndicator)
    assert isinstance(problem.g.blocks[1], StronglyConvexified)
    assert problem.g.blocks[1].gamma == 2.0
    bad = _error({"A": [[1.0, 0.0]], "b": [1.0], "g": {"family": "separable_sum", "params": {
        "blocks": [{"family": "l1", "dimension": 3}]}}})
    assert bad.field == "g"


def test_smooth_term():
    problem = ManifestLoader().from_dict(dict(CANONICAL, h={
        "family": "quadratic form", "params": {"Q": [[4.0]], "c": [1.0]}, "beta": 5.0}))
    assert problem.h.beta == 5.0
    assert problem.h.value(np.array([1.0])) == pytest.approx(3.0)
    default = ManifestLoader().from_dict(dict(CANONICAL, h={"family": "quadratic_form",
                                                             "params": {"Q": [[4.0]]}}))
    assert default.h.beta == pytest.approx(4.0)
    linear = ManifestLoader().from_dict(dict(CANONICAL, h={"family": "linear", "params": {"e": 2.0}}))
    np.testing.assert_allclose(linear.h.gradient(np.zeros(1)), [2.0])
    assert _error(dict(CANONICAL, h={"family": "linear"})).field == "h.params.e"


def test_consensus_manifest(tmp_path):
    (tmp_path / "p3.txt").write_text("3 1\n0 1\n1 2\n", encoding="utf-8")
    entries = [{"family": "quadratic", "params": {"center": c}} for c in (1.0, 2.0, 6.0)]
    from_file = parse_manifest(_write(tmp_path, {"graph": "p3.txt", "g_i": entries}))
    inline = ManifestLoader().from_dict({"graph": {"nodes": 3, "edges": [[0, 1], [1, 2]]},
                                         "g_i": entries})
    for problem in (from_file, inline):
        assert isinstance(problem, ConsensusProblem)
        assert problem.graph.node_count == 3
        assert problem.dimension == 3


def test_consensus_manifest_errors():
    graph = {"nodes": 3, "edges": [[0, 1], [1, 2]]}
    assert _error({"graph": graph, "g_i": [{"family": "l1"}] * 2}).field == "g_i"
    nested = _error({"graph": graph, "g_i": [{"family": "l1"}, {"family": "nope"}, {"family": "l1"}]})
    assert nested.field == "g_i[1].family"
    assert _error({"graph": {"nodes": 2, "edges": [[0, 3]]}, "g_i": [{"family": "l1"}] * 2}).field == "graph"


def test_manifest_file_errors(tmp_path):
    with pytest.raises(ManifestError, match="not found"):
        parse_manifest(str(tmp_path / "none.json"))
    broken = tmp_path / "broken.json"
    broken.write_text("{", encoding="utf-8")
    with pytest.raises(ManifestError, match="not valid JSON"):
        parse_manifest(str(broken))


def test_resolver_match_types():
    resolver = FamilyResolver(CatalogLoader().load_prox_families())
    exact = resolver.resolve("L1")
    assert exact.match_type == FamilyMatchType.EXACT_MATCH
    assert exact.confidence == 1.0
    alias = resolver.resolve("soft-threshold")
    assert alias.match_type == FamilyMatchType.ALIAS_MATCH
    assert alias.canonical_family == "l1"
    suggestion = resolver.resolve("boxx")
    assert suggestion.action == ResolutionAction.SUGGEST
    none = resolver.resolve("zzzzzzzz")
    assert none.match_type == FamilyMatchType.NO_MATCH
    assert none.action == ResolutionAction.REJECT
    assert resolver.top_matches("quadrati")[0].canonical_family == "quadratic"


def test_catalogues_cover_enum_families():
    loader = CatalogLoader()
    assert set(loader.load_prox_families()) == {"zero", "linear", "quadratic", "l1", "box",
                                                "nonnegative", "point", "separable_sum",
                                                "strongly_convexified"}
    assert set(loader.load_smooth_families()) == {"zero", "linear", "quadratic", "quadratic_form"}
