import numpy as np
import pytest

from provkit.model import validate_labels
from provkit.pgsim import (
    APPLICATION_LABELS,
    SimParams,
    TEAMS,
    _choose_target,
    _dispose_pick,
    _step_toward,
    _torus_delta,
    generate_dataset,
    simulate_run,
)

TINY = dict(
    n_sims=2,
    n_players=6,
    grid=15,
    n_pokemons=20,
    n_pokestops=4,
    max_ticks=80,
    seed=11,
)


class TestGeometry:
    def test_delta_wraps_short_way(self):
        assert _torus_delta(1, 48, 50) == -3
        assert _torus_delta(48, 1, 50) == 3
        assert _torus_delta(5, 5, 50) == 0
        assert _torus_delta(0, 25, 50) == 25  # antipode resolves forward

    def test_step_moves_both_axes(self):
        assert _step_toward(0, 0, 2, 49, (50, 50)) == (1, 49)
        assert _step_toward(10, 10, 10, 10, (50, 50)) == (10, 10)


class TestRules:
    def setup_method(self):
        self.pox = np.array([0, 5, 10])
        self.poy = np.array([0, 5, 10])
        self.strength = np.array([100, 3000, 1500])
        self.alive = np.array([True, True, True])

    def pick(self, mode, team, px=4, py=4):
        return _choose_target(
            mode, team, px, py, self.pox, self.poy, self.strength, self.alive, (15, 15)
        )

    def test_targeting_mode_varies_by_team(self):
        assert self.pick("targeting", "Valor") == 1  # strongest
        assert self.pick("targeting", "Mystic") == 0  # weakest
        assert self.pick("targeting", "Instinct") == 1  # closest to (4,4)

    def test_disposal_mode_everyone_chases_closest(self):
        for team in TEAMS:
            assert self.pick("disposal", team) == 1

    def test_dead_creatures_are_ignored(self):
        self.alive[1] = False
        assert self.pick("targeting", "Valor") == 2
        assert self.pick("disposal", "Mystic") in (0, 2)

    def test_no_creatures_yields_sentinel(self):
        self.alive[:] = False
        assert self.pick("targeting", "Valor") == -1

    def test_dispose_pick_per_team(self):
        storage = [(7, 900, 3), (8, 100, 10), (9, 500, 12)]
        assert _dispose_pick("Valor", storage) == -1
        assert _dispose_pick("Mystic", storage) == 0  # oldest capture
        assert _dispose_pick("Instinct", storage) == 1  # weakest
        assert _dispose_pick("Instinct", []) == -1

    def test_instinct_breaks_strength_ties_toward_oldest(self):
        storage = [(1, 100, 2), (2, 100, 5)]
        assert _dispose_pick("Instinct", storage) == 0


class TestParams:
    def test_mode_validated(self):
        with pytest.raises(ValueError):
            SimParams(mode="chaos")

    def test_negative_seed_rejected(self):
        with pytest.raises(ValueError):
            SimParams(seed=-1)

    def test_jsonable_round_trip(self):
        p = SimParams(mode="disposal", seed=3)
        blob = p.to_jsonable()
        assert SimParams(**blob) == p


class TestSimulation:
    def test_deterministic_for_same_seed(self):
        a = simulate_run(SimParams(**TINY), 0)
        b = simulate_run(SimParams(**TINY), 0)
        assert a == b

    def test_runs_differ(self):
        a = simulate_run(SimParams(**TINY), 0)
        b = simulate_run(SimParams(**TINY), 1)
        assert a != b

    def test_graphs_are_advisory_clean(self):
        for g in simulate_run(SimParams(**TINY), 0):
            assert validate_labels(g) == []

    def test_states_chain_by_derivation(self):
        g = max(simulate_run(SimParams(**TINY), 0), key=lambda g: len(g.nodes))
        der = {}
        for src, dst, lab in g.edges:
            if lab == "der":
                assert src not in der, "each state derives from exactly one prior"
                der[src] = dst
        n_states = sum(1 for labs in g.nodes.values() if "pg:PlayerState" in labs)
        assert n_states >= 2
        for i in range(1, n_states):
            assert der[f"state{i}"] == f"state{i - 1}"

    def test_every_state_specializes_the_player(self):
        for g in simulate_run(SimParams(**TINY), 0):
            spe = {src for src, dst, lab in g.edges if lab == "spe" and dst == "player"}
            states = {n for n, labs in g.nodes.items() if "pg:PlayerState" in labs}
            assert spe == states

    def test_activity_shape(self):
        g = max(simulate_run(SimParams(**TINY), 0), key=lambda g: len(g.nodes))
        acts = {n for n, labs in g.nodes.items() if "act" in labs}
        for act in acts:
            outs = [(dst, lab) for src, dst, lab in g.edges if src == act]
            labs = sorted(lab for _, lab in outs)
            assert labs == ["use", "use", "waw"]
            gens = [src for src, dst, lab in g.edges if lab == "gen" and dst == act]
            assert len(gens) == 1

    def test_throws_beyond_initial_balls_require_collecting(self):
        for g in simulate_run(SimParams(**TINY), 0):
            kinds = {"pg:Throwing": 0, "pg:Capturing": 0, "pg:Collecting": 0}
            for labs in g.nodes.values():
                for lab in labs:
                    if lab in kinds:
                        kinds[lab] += 1
            throws = kinds["pg:Throwing"] + kinds["pg:Capturing"]
            if throws > 10:
                assert kinds["pg:Collecting"] >= 1


class TestDataset:
    def test_counts_and_classes(self):
        ds = generate_dataset(SimParams(**TINY))
        assert len(ds.family.graphs) == 12
        per_team = {t: 0 for t in TEAMS}
        for team in ds.class_labels.values():
            per_team[team] += 1
        assert per_team == {"Valor": 4, "Mystic": 4, "Instinct": 4}

    def test_label_schema_declared_and_respected(self):
        ds = generate_dataset(SimParams(**TINY))
        assert ds.meta["application_labels"] == list(APPLICATION_LABELS)
        assert ds.family.application_label_universe <= set(APPLICATION_LABELS)

    def test_targeting_mode_never_disposes(self):
        ds = generate_dataset(SimParams(mode="targeting", **TINY))
        assert "pg:Disposing" not in ds.family.application_label_universe

    def test_disposal_mode_valor_never_disposes(self):
        params = SimParams(
            mode="disposal",
            n_sims=2,
            n_players=6,
            grid=12,
            n_pokemons=30,
            n_pokestops=4,
            max_storage=3,
            max_ticks=120,
            seed=5,
        )
        ds = generate_dataset(params)
        disposed = {
            team: 0
            for team in TEAMS
        }
        for g in ds.family.graphs:
            team = ds.class_labels[g.graph_id]
            for labs in g.nodes.values():
                if "pg:Disposing" in labs:
                    disposed[team] += 1
        assert disposed["Valor"] == 0
        assert disposed["Mystic"] > 0
        assert disposed["Instinct"] > 0

    def test_graph_ids_encode_mode_run_player(self):
        ds = generate_dataset(SimParams(**TINY))
        assert "targeting-s00-p00" in ds.class_labels
        assert "targeting-s01-p05" in ds.class_labels
