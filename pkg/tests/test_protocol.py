"""Grouping, phase state machines, dropout semantics, and full runs."""

import random
import warnings

import pytest

from swiftagg.errors import (
    IndivisibleNError,
    PhaseViolationError,
    TooManyDropoutsError,
    WrongSequenceError,
)
from swiftagg.field import FieldSpec, vec_add
from swiftagg.protocol import (
    AFTER_SHARING,
    BEFORE_SHARING,
    MID_SEQUENCE,
    CollusionBoundWarning,
    GroupPosition,
    IntraShare,
    Null,
    PHASE_SEQUENCE,
    ProtocolParams,
    SequencePartial,
    ServerState,
    ServerUpload,
    UserState,
    assign_groups,
    execute_protocol,
    run_protocol,
)
from swiftagg.sharing import build_polynomial, sample_noise, share_for, user_rng

F101 = FieldSpec(101)


def make_params(n, t, d, length=1, p=101):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CollusionBoundWarning)
        return ProtocolParams(n, t, d, length, FieldSpec(p))


def field_sum(field, vectors):
    total = field.zeros(len(vectors[0].values))
    for v in vectors:
        total = vec_add(total, v)
    return total


def sampled_noise(params, seed):
    return {
        uid: sample_noise(params.field, params.t, params.model_len, user_rng(seed, uid))
        for uid in range(1, params.n + 1)
    }


# ---------------------------------------------------------------------------
# Parameters and grouping
# ---------------------------------------------------------------------------


def test_params_reject_indivisible_n():
    with pytest.raises(IndivisibleNError):
        make_params(5, 1, 1)
    with pytest.raises(IndivisibleNError):
        make_params(10, 2, 1)


def test_params_reject_small_field():
    with pytest.raises(ValueError):
        make_params(4, 1, 0, p=2)  # group size 2 needs p > 2
    with pytest.raises(ValueError):
        make_params(8, 2, 1, p=3)  # group size 4 needs p > 4


def test_params_reject_bad_bounds():
    with pytest.raises(ValueError):
        make_params(2, 1, 1)  # t + d >= n
    with pytest.raises(ValueError):
        make_params(4, 0, 1)
    with pytest.raises(ValueError):
        make_params(4, 1, -1)


def test_t_equal_one_warns():
    with pytest.warns(CollusionBoundWarning):
        ProtocolParams(6, 1, 1, 1, FieldSpec(101))


def test_assign_groups_canonical_layout():
    params = make_params(12, 2, 1)
    positions = assign_groups(params)
    assert positions[8] == GroupPosition(2, 4)
    assert positions[7] == GroupPosition(2, 3)
    assert positions[11] == GroupPosition(3, 3)
    assert len(set(positions.values())) == 12


def test_assign_groups_single_group():
    params = make_params(4, 2, 1)
    positions = assign_groups(params)
    assert params.num_groups == 1
    assert {pos.gamma for pos in positions.values()} == {1}


def test_assign_groups_contiguous_formula():
    params = make_params(6, 1, 1)
    positions = assign_groups(params)
    assert positions[4] == GroupPosition(2, 1)


def test_assign_groups_shuffle_is_seeded_bijection():
    params = make_params(12, 2, 1)
    a = assign_groups(params, shuffle_seed=5)
    b = assign_groups(params, shuffle_seed=5)
    c = assign_groups(params, shuffle_seed=6)
    assert a == b
    assert a != c
    assert sorted(a) == list(range(1, 13))
    assert len(set(a.values())) == 12
    for pos in a.values():
        assert 1 <= pos.gamma <= 3 and 1 <= pos.t <= 4


# ---------------------------------------------------------------------------
# Per-user state machine
# ---------------------------------------------------------------------------


def make_user(position, seed=0, t=1, length=1):
    rng = random.Random(seed)
    model = F101.vector([rng.randrange(101) for _ in range(length)])
    poly = build_polynomial(model, sample_noise(F101, t, length, rng), t)
    return UserState(position, poly)


def test_compute_q_all_senders_dropped_except_self():
    nu = 4
    user = make_user(GroupPosition(1, 2))
    own = share_for(user.poly, 2)
    user.receive_share(2, own)
    for other in (1, 3, 4):
        user.mark_missing(other, F101.zeros(1))
    assert user.compute_q(nu) == own


def test_compute_q_matches_poly_sum_oracle():
    nu = 3
    users = [make_user(GroupPosition(1, t), seed=t) for t in (1, 2, 3)]
    receiver = users[1]
    for sender in users:
        receiver.receive_share(sender.position.t, share_for(sender.poly, 2))
    expected = field_sum(
        F101, [share_for(sender.poly, 2) for sender in users]
    )
    assert receiver.compute_q(nu) == expected


def test_compute_q_before_resolution_is_phase_violation():
    user = make_user(GroupPosition(1, 1))
    user.receive_share(1, share_for(user.poly, 1))
    with pytest.raises(PhaseViolationError):
        user.compute_q(3)


def test_step_sequence_group_one_emits_q():
    user = make_user(GroupPosition(1, 2))
    user.received_shares = {1: F101.zeros(1), 2: F101.zeros(1)}
    q = user.compute_q(2)
    msg = user.step_sequence(None, num_groups=2)
    assert isinstance(msg, SequencePartial)
    assert msg.payload == q
    assert msg.recipient == GroupPosition(2, 2)


def test_step_sequence_null_upstream_silences():
    user = make_user(GroupPosition(2, 3))
    user.received_shares = {1: F101.zeros(1), 2: F101.zeros(1), 3: F101.zeros(1)}
    user.compute_q(3)
    incoming = Null(PHASE_SEQUENCE, GroupPosition(1, 3), GroupPosition(2, 3), 3)
    out = user.step_sequence(incoming, num_groups=3)
    assert isinstance(out, Null)
    assert user.silenced
    # silenced users emit only null symbols afterwards
    again = user.step_sequence(
        SequencePartial(GroupPosition(1, 3), GroupPosition(2, 3), F101.vector([1])),
        num_groups=3,
    )
    assert isinstance(again, Null)


def test_step_sequence_wrong_index_rejected():
    user = make_user(GroupPosition(2, 1))
    user.received_shares = {1: F101.zeros(1), 2: F101.zeros(1)}
    user.compute_q(2)
    wrong = SequencePartial(GroupPosition(1, 2), GroupPosition(2, 2), F101.vector([3]))
    with pytest.raises(WrongSequenceError):
        user.step_sequence(wrong, num_groups=2)


def test_step_sequence_requires_q():
    user = make_user(GroupPosition(1, 1))
    with pytest.raises(PhaseViolationError):
        user.step_sequence(None, num_groups=2)


def test_step_sequence_last_group_uploads():
    user = make_user(GroupPosition(2, 1))
    user.received_shares = {1: F101.zeros(1), 2: F101.zeros(1)}
    user.compute_q(2)
    upstream = SequencePartial(GroupPosition(1, 1), GroupPosition(2, 1), F101.vector([5]))
    out = user.step_sequence(upstream, num_groups=2)
    assert isinstance(out, ServerUpload)
    assert out.payload == vec_add(F101.vector([5]), user.q)


def test_intra_share_cannot_cross_groups():
    with pytest.raises(ValueError):
        IntraShare(GroupPosition(1, 1), GroupPosition(2, 2), F101.vector([1]))
    with pytest.raises(ValueError):
        IntraShare(GroupPosition(1, 1), GroupPosition(1, 1), F101.vector([1]))


def test_sequence_partial_shape_enforced():
    with pytest.raises(ValueError):
        SequencePartial(GroupPosition(1, 1), GroupPosition(3, 1), F101.vector([1]))
    with pytest.raises(ValueError):
        SequencePartial(GroupPosition(1, 1), GroupPosition(2, 2), F101.vector([1]))


def test_server_needs_enough_uploads():
    params = make_params(4, 2, 1)
    server = ServerState()
    server.receive(ServerUpload(GroupPosition(1, 1), F101.vector([1])))
    server.receive(ServerUpload(GroupPosition(1, 2), F101.vector([2])))
    with pytest.raises(TooManyDropoutsError):
        server.recover(params)


# ---------------------------------------------------------------------------
# Full runs
# ---------------------------------------------------------------------------


def random_models(params, seed):
    rng = random.Random(seed)
    return [
        params.field.vector([rng.randrange(params.field.p) for _ in range(params.model_len)])
        for _ in range(params.n)
    ]


def test_motivating_scenario_facts():
    params = make_params(12, 2, 1, length=3)
    models = random_models(params, 21)
    recovered, log = run_protocol(params, models, {7}, seed=3)

    expected = field_sum(params.field, [m for n, m in enumerate(models, start=1) if n != 7])
    assert recovered == expected

    by_user = {}
    for msg in log:
        if msg.sender is not None:
            by_user.setdefault(log.user_of[msg.sender], []).append(msg)
    # the victim emits only null symbols
    assert all(isinstance(m, Null) for m in by_user[7])
    # its downstream neighbour goes silent in turn
    assert any(isinstance(m, Null) and m.phase == "upload" for m in by_user[11])
    uploads = {m.t for m in log if isinstance(m, ServerUpload)}
    assert uploads == {1, 2, 4}


def test_no_dropout_run_all_uploads_arrive():
    params = make_params(12, 2, 1, length=2)
    models = random_models(params, 5)
    recovered, log = run_protocol(params, models, set(), seed=8)
    assert recovered == field_sum(params.field, models)
    uploads = [m for m in log if isinstance(m, ServerUpload)]
    assert len(uploads) == params.group_size


def test_upload_equals_unrolled_group_sums():
    # oracle: unroll the sequence recursion by summing every group's in-group
    # share sum directly from the users' polynomials
    params = make_params(12, 2, 1, length=2)
    models = random_models(params, 13)
    noise = sampled_noise(params, seed=6)
    run = execute_protocol(params, models, noise, {})
    positions = run.positions
    polys = {
        uid: build_polynomial(models[uid - 1], noise[uid], params.t)
        for uid in range(1, 13)
    }
    for msg in run.log:
        if not isinstance(msg, ServerUpload):
            continue
        t = msg.t
        q_sums = []
        for gamma in range(1, params.num_groups + 1):
            members = [uid for uid, pos in positions.items() if pos.gamma == gamma]
            q_sums.append(
                field_sum(params.field, [share_for(polys[uid], t) for uid in members])
            )
        assert msg.payload == field_sum(params.field, q_sums)


def test_transcript_is_deterministic():
    params = make_params(6, 1, 1, length=2, p=11)
    models = random_models(params, 17)
    _, log_a = run_protocol(params, models, {2}, seed=99)
    _, log_b = run_protocol(params, models, {2}, seed=99)
    assert log_a.serialize() == log_b.serialize()
    _, log_c = run_protocol(params, models, {2}, seed=100)
    assert log_a.serialize() != log_c.serialize()


def test_group_shuffle_preserves_recovery():
    params = make_params(12, 2, 1, length=2)
    models = random_models(params, 31)
    recovered, _ = run_protocol(params, models, {4}, seed=1, group_shuffle=True)
    expected = field_sum(params.field, [m for n, m in enumerate(models, start=1) if n != 4])
    assert recovered == expected


def test_phase_major_transcript_order():
    params = make_params(12, 2, 1)
    models = random_models(params, 2)
    _, log = run_protocol(params, models, set(), seed=0)
    phases = [m.phase for m in log]
    boundary = {"intra": 0, "sequence": 1, "upload": 2}
    assert phases == sorted(phases, key=boundary.__getitem__)


@pytest.mark.parametrize("timing", [BEFORE_SHARING, AFTER_SHARING, MID_SEQUENCE])
@pytest.mark.parametrize("victim", [1, 5, 7, 12])
def test_dropout_timing_semantics(timing, victim):
    params = make_params(12, 2, 1, length=2)
    models = random_models(params, victim * 7 + 1)
    noise = sampled_noise(params, seed=4)
    run = execute_protocol(params, models, noise, {victim: timing})
    if timing == BEFORE_SHARING:
        contributing = [m for n, m in enumerate(models, start=1) if n != victim]
    else:
        # shares were already distributed, so the model still reaches the sum
        contributing = models
    assert run.recovered == field_sum(params.field, contributing)
    assert run.contributors == frozenset(
        n for n in range(1, 13) if timing == BEFORE_SHARING and n != victim or timing != BEFORE_SHARING
    )


def test_at_most_d_sequences_die():
    params = make_params(12, 1, 2, length=1)
    models = random_models(params, 3)
    noise = sampled_noise(params, seed=9)
    # two victims on the same sequence index kill only that one sequence
    positions = assign_groups(params)
    assert positions[1].t == positions[5].t
    run = execute_protocol(
        params, models, noise, {1: BEFORE_SHARING, 5: MID_SEQUENCE}
    )
    null_uploads = [m for m in run.log if isinstance(m, Null) and m.phase == "upload"]
    assert len(null_uploads) == 1


def test_too_many_victims_rejected():
    params = make_params(6, 1, 1, p=11)
    models = random_models(params, 1)
    noise = sampled_noise(params, seed=2)
    with pytest.raises(ValueError):
        execute_protocol(params, models, noise, {1: BEFORE_SHARING, 2: BEFORE_SHARING})


def test_fuzz_recovery_matches_sum_oracle():
    rng = random.Random(2718)
    combos = []
    for t in (1, 2, 3):
        for d in (0, 1, 2):
            nu = t + d + 1
            for groups in (1, 2, 3):
                n = nu * groups
                if t + d < n and 4 <= n <= 24:
                    combos.append((n, t, d))
    for trial in range(60):
        n, t, d = combos[rng.randrange(len(combos))]
        p = rng.choice([11, 101, (1 << 31) - 1])
        length = rng.choice([1, 8])
        params = make_params(n, t, d, length=length, p=p)
        models = random_models(params, rng.randrange(10**6))
        victims = rng.sample(range(1, n + 1), rng.randint(0, d))
        timings = {v: rng.choice([BEFORE_SHARING, AFTER_SHARING, MID_SEQUENCE]) for v in victims}
        noise = sampled_noise(params, seed=rng.randrange(10**6))
        run = execute_protocol(params, models, noise, timings)
        contributing = [
            m for uid, m in enumerate(models, start=1)
            if timings.get(uid) != BEFORE_SHARING
        ]
        assert run.recovered == field_sum(params.field, contributing)
        # each victim silences at most its own sequence index
        dead = sum(1 for m in run.log if m.phase == "upload" and m.payload is None)
        assert dead <= len(victims) <= d
