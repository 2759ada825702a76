from collections import Counter

import pytest

from gstrat.chem import MoleculeError, diels_alder_rule, parse_molecule
from gstrat.graphs import GraphRepository, isomorphic
from gstrat.rewrite import enumerate_proper_derivations
from gstrat.rules import validate_rule


def label_counts(g):
    return Counter(label for _, label in g.vertices())


class TestParseMolecule:
    def test_isoprene(self):
        g = parse_molecule("CC(=C)C=C")
        assert g.vertex_count == 13
        assert label_counts(g) == {"C": 5, "H": 8}
        double_bonds = [e for e in g.edges() if e[2] == "="]
        assert len(double_bonds) == 2

    def test_cyclohexadiene(self):
        g = parse_molecule("C1=CC=CCC1")
        assert g.vertex_count == 14
        assert label_counts(g) == {"C": 6, "H": 8}
        assert sum(1 for e in g.edges() if e[2] == "=") == 2
        # ring: every carbon has exactly two carbon neighbours
        carbons = [v for v, l in g.vertices() if l == "C"]
        for c in carbons:
            assert sum(1 for n in g.neighbors(c) if g.label(n) == "C") == 2

    def test_water(self):
        g = parse_molecule("O")
        assert g.vertex_count == 3
        assert label_counts(g) == {"O": 1, "H": 2}
        assert all(e[2] == "-" for e in g.edges())

    def test_triple_bond(self):
        g = parse_molecule("C#N")
        assert label_counts(g) == {"C": 1, "N": 1, "H": 1}
        assert sum(1 for e in g.edges() if e[2] == "#") == 1

    def test_equal_specs_intern_equal(self):
        repo = GraphRepository()
        a, _ = repo.intern(parse_molecule("C=CC=C"))
        b, _ = repo.intern(parse_molecule("C(=C)C=C"))
        assert a == b

    def test_errors(self):
        with pytest.raises(MoleculeError):
            parse_molecule("CX")  # unsupported atom
        with pytest.raises(MoleculeError):
            parse_molecule("C1CC")  # unclosed ring
        with pytest.raises(MoleculeError):
            parse_molecule("C(C")  # unclosed branch
        with pytest.raises(MoleculeError):
            parse_molecule("O=C=O=C")  # whatever this is, oxygen valence blows
        with pytest.raises(MoleculeError):
            parse_molecule("C=")
        with pytest.raises(MoleculeError):
            parse_molecule("")

    def test_valence_exactness(self):
        from gstrat.chem import BOND_ORDER, VALENCE

        for spec in ("CC(=C)C=C", "C1=CC=CCC1", "O", "C#N", "N", "CO"):
            g = parse_molecule(spec)
            for v, label in g.vertices():
                used = sum(BOND_ORDER[el] for el in g.neighbors(v).values())
                assert used == VALENCE[label]


class TestDielsAlderRule:
    def test_chemically_valid(self):
        assert validate_rule(diels_alder_rule(), chemical_mode=True) == []

    def test_no_derivations_from_water(self):
        repo = GraphRepository()
        wid, _ = repo.intern(parse_molecule("O"))
        assert enumerate_proper_derivations(diels_alder_rule(), [wid],
                                            repo=repo) == []

    def test_seed_pair_produces_fig1_adduct(self):
        repo = GraphRepository()
        iso, _ = repo.intern(parse_molecule("CC(=C)C=C"))
        chx, _ = repo.intern(parse_molecule("C1=CC=CCC1"))
        derivations = enumerate_proper_derivations(
            diels_alder_rule(), [iso, chx], repo=repo,
            left_filter=lambda ids: len(ids) == 2)
        adduct = parse_molecule("CC(=C)C1CC2CCC1C=C2")
        outputs = [repo.graph(g) for d in derivations
                   if set(d.inputs) == {iso, chx} for g in d.outputs]
        assert any(isomorphic(g, adduct) for g in outputs)

    def test_atom_conservation(self):
        repo = GraphRepository()
        iso, _ = repo.intern(parse_molecule("CC(=C)C=C"))
        chx, _ = repo.intern(parse_molecule("C1=CC=CCC1"))
        for d in enumerate_proper_derivations(
                diels_alder_rule(), [iso, chx], repo=repo,
                left_filter=lambda ids: len(ids) == 2):
            in_labels = Counter()
            for gid in d.inputs:
                in_labels += label_counts(repo.graph(gid))
            out_labels = Counter()
            for gid in d.outputs:
                out_labels += label_counts(repo.graph(gid))
            assert in_labels == out_labels
            assert d.atom_map is not None

    def test_retro_reaction_regenerates_educts(self):
        repo = GraphRepository()
        iso, _ = repo.intern(parse_molecule("CC(=C)C=C"))
        chx, _ = repo.intern(parse_molecule("C1=CC=CCC1"))
        adduct, _ = repo.intern(parse_molecule("CC(=C)C1CC2CCC1C=C2"))
        retro = diels_alder_rule().inverted()
        derivations = enumerate_proper_derivations(retro, [adduct], repo=repo)
        assert any(sorted(d.outputs) == sorted((iso, chx)) for d in derivations)
