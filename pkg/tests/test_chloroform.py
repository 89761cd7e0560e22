import numpy as np
import pytest

from reachset import (
    BLOCKS,
    CHLOROFORM,
    CoherenceVector,
    RankDeficient,
    RateSet,
    ValidationError,
    assemble_generator,
    build_basis,
    evolve,
    fit_rates,
    lindblad_to_bloch,
    secular_blocks,
    simulate_block,
    synthesize_trajectories,
)
from reachset.chloroform import TrajectorySample, block_matrices, coupling_hamiltonian


def test_default_rates_are_the_fits():
    np.testing.assert_allclose(
        CHLOROFORM.rates_array(),
        [0.0532, 0.0918, 0.0798, 0.0212, 0.0, 0.0022,
         3.495, 6.536, 0.0100, 2.955, 6.118, 0.030, 9.523, 0.008],
    )
    assert CHLOROFORM.J == 214.5
    assert (CHLOROFORM.eps_C, CHLOROFORM.eps_H) == (1.0, 4.0)


def test_equilibrium_vector(chloroform_gen):
    basis = build_basis(2)
    expected = np.zeros(15)
    expected[basis.index("ZI")] = 1.0
    expected[basis.index("IZ")] = 4.0
    np.testing.assert_allclose(chloroform_gen.r_eq, expected)
    # population drive is consistent with the thermal steady state:
    # r1*eps_C + r4*eps_H balances the ZI drive exactly, and so on
    pop = [basis.index(lab) for lab in BLOCKS["population"]]
    resid = chloroform_gen.Rmat[np.ix_(pop, pop)] @ expected[pop] \
        - chloroform_gen.v[pop]
    assert np.abs(resid).max() < 1e-9


def test_coupling_terms_match_hamiltonian(chloroform_gen):
    direct = lindblad_to_bloch(coupling_hamiltonian(CHLOROFORM), None, unital=True)
    np.testing.assert_allclose(chloroform_gen.Hmat, direct.Hmat, atol=1e-12)


def test_zero_cross_rates_block_diagonal():
    rates = RateSet(r4=0.0, r5=0.0, r6=0.0, r9=0.0, r12=0.0, r14=0.0)
    gen = assemble_generator(rates)
    R = gen.Rmat
    # within each block only the diagonal survives
    basis = build_basis(2)
    for labels in BLOCKS.values():
        idx = [basis.index(lab) for lab in labels]
        sub = R[np.ix_(idx, idx)]
        np.testing.assert_allclose(sub, np.diag(np.diagonal(sub)), atol=1e-15)
        assert np.diagonal(sub).min() > 0


def test_secular_blocks_partition(chloroform_gen):
    blocks = secular_blocks()
    all_labels = [lab for labs in blocks.values() for lab in labs]
    assert len(all_labels) == 15 and len(set(all_labels)) == 15
    basis = build_basis(2)
    R = chloroform_gen.Rmat
    H = chloroform_gen.Hmat
    for name_a, labs_a in blocks.items():
        for name_b, labs_b in blocks.items():
            if name_a == name_b:
                continue
            ia = [basis.index(lab) for lab in labs_a]
            ib = [basis.index(lab) for lab in labs_b]
            assert np.abs(R[np.ix_(ia, ib)]).max() == 0.0
            assert np.abs(H[np.ix_(ia, ib)]).max() == 0.0


def test_coherence_block_positive():
    sym, _ = block_matrices(CHLOROFORM, "carbon_coherence")
    assert np.linalg.eigvalsh(sym).min() > 0


def test_free_evolution_settles_at_equilibrium(chloroform_gen):
    # slowest population eigenvalue is ~0.044 1/s, so the 1e-9 residual
    # needs t >= ~510 s; 600 s gives margin
    start = CoherenceVector(n=2, r=np.zeros(15))
    final = evolve(chloroform_gen, start, 600.0)
    assert np.linalg.norm(final.r - chloroform_gen.r_eq) < 1e-9


def test_assembly_guards():
    with pytest.raises(ValidationError):
        assemble_generator(RateSet(r1=-0.1))
    with pytest.raises(ValidationError):
        assemble_generator(RateSet(r7=float("nan")))


def test_trajectory_sample_validation():
    with pytest.raises(ValidationError):
        TrajectorySample(times=[0.0, 0.0, 1.0], observables={})
    with pytest.raises(ValidationError):
        TrajectorySample(times=[0.0, 1.0], observables={"QQ": [0.0, 1.0]})
    with pytest.raises(ValidationError):
        TrajectorySample(times=[0.0, 1.0], observables={"ZI": [0.0]})


POP_STARTS = [
    np.array([-1.0, 4.0, 0.0]),
    np.array([1.0, -4.0, 0.0]),
    np.array([0.0, 0.0, 3.0]),
]


def _synthesize(block, noise=0.0, seed=None):
    if block == "population":
        times = np.linspace(0.0, 40.0, 40)
        starts = POP_STARTS
    else:
        times = np.linspace(0.0, 1.2, 25)
        k = len(BLOCKS[block])
        starts = [np.eye(k)[0] * 2.0, np.eye(k)[2] * 1.5]
    return synthesize_trajectories(
        CHLOROFORM, block, starts, times, noise=noise, seed=seed
    )


def test_population_fit_round_trip_zero_noise():
    trajs = _synthesize("population")
    guess = CHLOROFORM.with_rates(
        ("r1", "r2", "r3", "r4", "r5", "r6"),
        np.array([0.0532, 0.0918, 0.0798, 0.0212, 0.0, 0.0022]) * 1.5 + 0.003,
    )
    fitted, rms = fit_rates(trajs, "population", init_guess=guess, n_starts=2)
    assert rms < 1e-8
    for name in ("r1", "r2", "r3", "r4", "r6"):
        assert getattr(fitted, name) == pytest.approx(
            getattr(CHLOROFORM, name), rel=1e-4
        )
    assert abs(fitted.r5) < 1e-4


def test_population_fit_with_noise():
    errs = []
    for seed in range(3):
        trajs = _synthesize("population", noise=0.01, seed=seed)
        fitted, _ = fit_rates(trajs, "population", n_starts=1, seed=seed)
        errs.append(
            [
                abs(fitted.r1 - CHLOROFORM.r1) / CHLOROFORM.r1,
                abs(fitted.r2 - CHLOROFORM.r2) / CHLOROFORM.r2,
                abs(fitted.r3 - CHLOROFORM.r3) / CHLOROFORM.r3,
            ]
        )
    assert np.mean(errs, axis=0).max() < 0.05


def test_single_time_point_is_rank_deficient():
    traj = TrajectorySample(times=[0.0], observables={"ZI": [1.0]})
    with pytest.raises(RankDeficient):
        fit_rates([traj], "population")


def test_under_determined_data_rejected():
    times = np.array([0.0, 1.0, 2.0])
    sim = simulate_block(CHLOROFORM, "population", POP_STARTS[0], times)
    traj = TrajectorySample(times=times, observables={"ZI": sim[:, 0]})
    # 2 informative residuals (t>0) against 6 free rates
    with pytest.raises(RankDeficient):
        fit_rates([traj], "population")


def test_fit_requires_time_zero_start():
    times = np.array([0.5, 1.0, 2.0, 3.0])
    sim = simulate_block(CHLOROFORM, "population", POP_STARTS[0], times)
    traj = TrajectorySample(
        times=times,
        observables={lab: sim[:, j] for j, lab in enumerate(BLOCKS["population"])},
    )
    with pytest.raises(ValidationError):
        fit_rates([traj], "population")


def test_rates_json_round_trip():
    d = CHLOROFORM.to_json_dict()
    back = RateSet.from_json_dict(d)
    assert back == CHLOROFORM
    with pytest.raises(ValidationError):
        RateSet.from_json_dict({"r": [1.0] * 10, "J_hz": 214.5})
