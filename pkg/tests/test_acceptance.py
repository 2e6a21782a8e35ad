"""Acceptance suite: seven system-level checks with pinned tolerances.

Each test prints one [PASS]/[FAIL] line (run ``pytest -s`` to see them)
and asserts the same outcome, enforcing the stated runtime budget where
one applies.
"""

import time

import numpy as np

from lunar_track import (
    DetectorConfig,
    FeaturePoint,
    FixationTemplate,
    FlowConfig,
    PipelineConfig,
    StructureTensor,
    accept_pixel,
    detect_features,
    generate_terrain,
    laplacian_filter,
    make_scene,
    match_template,
    track_feature,
    run_pipeline,
    variance_map,
    write_sequence,
)

LAMBDA_T = 1500.0


def _report(num: int, ok: bool, detail: str) -> bool:
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {detail}")
    return ok


def test_criterion_1_eigenvalue_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    n = 12000
    a = rng.uniform(0.0, 1e4, n)
    c = rng.uniform(0.0, 1e4, n)
    b = rng.uniform(-1.0, 1.0, n) * np.sqrt(a * c)

    mats = np.empty((n, 2, 2))
    mats[:, 0, 0] = a
    mats[:, 0, 1] = b
    mats[:, 1, 0] = b
    mats[:, 1, 1] = c
    lam2 = np.linalg.eigvalsh(mats)[:, 0]  # ascending: smaller eigenvalue first

    keep = np.abs(lam2 - LAMBDA_T) > 1e-6
    idx = np.flatnonzero(keep)
    oracle = lam2[idx] > LAMBDA_T
    mine = np.array(
        [accept_pixel(StructureTensor(a[i], b[i], c[i]), LAMBDA_T) for i in idx]
    )
    elapsed = time.perf_counter() - t0

    agree = bool(np.array_equal(mine, oracle))
    enough = idx.size >= 10000
    ok = agree and enough and elapsed < 1.0
    assert _report(
        1,
        ok,
        f"root-free acceptance vs eigenvalue oracle agrees on {idx.size} tensors "
        f"({int(oracle.sum())} accepted), {elapsed:.2f}s",
    )


def test_criterion_2_filter_chain_identities():
    t0 = time.perf_counter()
    const = np.full((64, 64), 73.0)
    lap = laplacian_filter(const)
    interior_zero = bool(np.all(lap[1:-1, 1:-1] == 0.0))
    vmap_zero = bool(np.all(variance_map(const, 4, 4) == 0.0))

    yy, xx = np.mgrid[0:48, 0:48]
    ramp = 3.0 * xx + 5.0 * yy + 7.0
    ramp_zero = bool(np.all(laplacian_filter(ramp)[1:-1, 1:-1] == 0.0))

    rng = np.random.default_rng(202)
    worst = 0.0
    for _ in range(100):
        img = rng.uniform(0.0, 255.0, (128, 128))
        one_pass = variance_map(img, 4, 4)
        win = np.lib.stride_tricks.sliding_window_view(img, (4, 4))
        mu = win.mean(axis=(2, 3))
        two_pass = ((win - mu[:, :, None, None]) ** 2).mean(axis=(2, 3))
        worst = max(worst, float(np.max(np.abs(one_pass - two_pass) / np.abs(two_pass))))
    elapsed = time.perf_counter() - t0

    ok = interior_zero and vmap_zero and ramp_zero and worst < 1e-6 and elapsed < 5.0
    assert _report(
        2,
        ok,
        f"constant/ramp identities hold, one-pass vs two-pass variance worst "
        f"rel err {worst:.2e}, {elapsed:.2f}s",
    )


def _oracle_match(patch, frame, anchor, radius):
    """Exhaustive SSD scan, selecting by the full tie-break key."""
    th, tw = patch.shape
    fh, fw = frame.shape
    ax, ay = anchor
    candidates = []
    for dx in range(-radius, radius + 1):
        for dy in range(-radius, radius + 1):
            x, y = ax + dx, ay + dy
            if x < 0 or y < 0 or x + tw > fw or y + th > fh:
                continue
            diff = frame[y : y + th, x : x + tw] - patch
            ssd = float((diff * diff).sum())
            candidates.append((ssd, abs(dx) + abs(dy), dy, dx))
    if not candidates:
        return None
    ssd, _, dy, dx = min(candidates)
    return (dx, dy), ssd


def test_criterion_3_block_match_oracle_and_shift_recovery():
    t0 = time.perf_counter()
    rng = np.random.default_rng(303)
    oracle_agree = 0
    for _ in range(100):
        frame = rng.uniform(0.0, 255.0, (64, 64))
        patch = rng.uniform(0.0, 255.0, (16, 16))
        tpl = FixationTemplate(id=0, patch=patch, anchor=(24, 24), birth_frame=0)
        got = match_template(tpl, frame, 5)
        want = _oracle_match(patch, frame, (24, 24), 5)
        if got.displacement == want[0] and got.residual == want[1]:
            oracle_agree += 1

    terrain = generate_terrain(7, 320, 320, 25)
    frame0 = terrain[60:260, 60:260]
    anchors = [(40, 40), (40, 140), (140, 40), (140, 140), (90, 90)]
    recovered = 0
    for t in range(100):
        sx, sy = int(rng.integers(-10, 11)), int(rng.integers(-10, 11))
        frame1 = terrain[60 - sy : 260 - sy, 60 - sx : 260 - sx]
        ax, ay = anchors[t % len(anchors)]
        tpl = FixationTemplate(
            id=0, patch=frame0[ay : ay + 20, ax : ax + 20].copy(), anchor=(ax, ay), birth_frame=0
        )
        got = match_template(tpl, frame1, 10)
        if got is not None and got.displacement == (sx, sy):
            recovered += 1
    elapsed = time.perf_counter() - t0

    ok = oracle_agree == 100 and recovered == 100 and elapsed < 10.0
    assert _report(
        3,
        ok,
        f"oracle equality {oracle_agree}/100, integer-shift recovery "
        f"{recovered}/100, {elapsed:.2f}s",
    )


def _wave_field(rng):
    """Band-limited test surface: four plane waves, periods 18 to 40 px."""
    waves = []
    for _ in range(4):
        theta = rng.uniform(0.0, 2.0 * np.pi)
        k = 2.0 * np.pi / rng.uniform(18.0, 40.0)
        waves.append((k * np.cos(theta), k * np.sin(theta), rng.uniform(15.0, 35.0), rng.uniform(0.0, 2.0 * np.pi)))

    def field(xs, ys):
        out = np.full(np.broadcast(xs, ys).shape, 128.0)
        for kx, ky, amp, phase in waves:
            out = out + amp * np.sin(kx * xs + ky * ys + phase)
        return out

    return field


def test_criterion_4_subpixel_flow_recovery():
    t0 = time.perf_counter()
    yy, xx = np.mgrid[0:41, 0:41].astype(np.float64)
    center = FeaturePoint(pos=(20.0, 20.0), score=0.0, tensor=StructureTensor(0, 0, 0), parent_template=0)
    cfg = FlowConfig()

    errors = []
    for trial in range(100):
        rng = np.random.default_rng(400 + trial)
        field = _wave_field(rng)
        mag = rng.uniform(0.0, 2.0)
        ang = rng.uniform(0.0, 2.0 * np.pi)
        dx, dy = mag * np.cos(ang), mag * np.sin(ang)
        prev = field(xx, yy)
        nxt = field(xx - dx, yy - dy)  # content moves +(dx, dy)
        status = track_feature(prev, nxt, center, cfg)
        if status.tracked:
            errors.append(float(np.hypot(status.displacement[0] - dx, status.displacement[1] - dy)))
        else:
            errors.append(float("inf"))
    median = float(np.median(errors))
    p95 = float(np.percentile(errors, 95))

    still_ok = True
    worst_d = worst_res = 0.0
    for trial in range(20):
        rng = np.random.default_rng(450 + trial)
        prev = _wave_field(rng)(xx, yy)
        status = track_feature(prev, prev, center, cfg)
        if not status.tracked:
            still_ok = False
            continue
        worst_d = max(worst_d, float(np.hypot(*status.displacement)))
        worst_res = max(worst_res, status.residual)
    elapsed = time.perf_counter() - t0

    ok = (
        median < 0.1
        and p95 < 0.3
        and still_ok
        and worst_d < 0.01
        and worst_res < 1e-9
        and elapsed < 10.0
    )
    assert _report(
        4,
        ok,
        f"100 band-limited windows: median {median:.4f} px, p95 {p95:.4f} px; "
        f"zero-motion worst |d| {worst_d:.2e} px, worst residual {worst_res:.2e}; "
        f"{elapsed:.2f}s",
    )


def _descent_run(tmp_path, overlay=False, tag="a"):
    scene = make_scene(seed=2, frame_count=10, step=(3.0, 2.0))
    paths = write_sequence(scene, tmp_path / "seq")
    out = tmp_path / f"out_{tag}"
    tracks, reports = run_pipeline(paths, PipelineConfig(overlay=overlay), out_dir=out)
    return tracks, reports, out


def test_criterion_5_end_to_end_descent(tmp_path):
    t0 = time.perf_counter()
    tracks, reports, _ = _descent_run(tmp_path)
    elapsed = time.perf_counter() - t0

    min_active = min(rep.active_templates for rep in reports)
    survivors = [
        t for t in tracks
        if len(t.points) == 10 and all(p.status == "tracked" for p in t.points)
    ]
    step_errors = []
    for t in survivors:
        for a, b in zip(t.points, t.points[1:]):
            step_errors.append(float(np.hypot((b.x - a.x) - 3.0, (b.y - a.y) - 2.0)))
    mean_err = float(np.mean(step_errors)) if step_errors else float("inf")

    reconciled = True
    live_prev = 0
    for rep in reports:
        if rep.live_tracks != live_prev + rep.new_tracks - rep.lost_tracks:
            reconciled = False
        live_prev = rep.live_tracks

    ok = (
        min_active >= 5
        and len(survivors) >= 10
        and mean_err < 0.15
        and reconciled
        and elapsed < 30.0
    )
    assert _report(
        5,
        ok,
        f"10-frame descent: min active templates {min_active}, full-length tracks "
        f"{len(survivors)}, mean per-step error {mean_err:.4f} px, reconciliation "
        f"{'holds' if reconciled else 'broken'}, {elapsed:.2f}s",
    )


def test_criterion_6_byte_identical_determinism(tmp_path):
    t0 = time.perf_counter()
    _, _, out_a = _descent_run(tmp_path, overlay=True, tag="a")
    _, _, out_b = _descent_run(tmp_path, overlay=True, tag="b")

    same = True
    for name in ("tracks.csv", "frames.csv"):
        same = same and (out_a / name).read_bytes() == (out_b / name).read_bytes()
    names_a = sorted(p.name for p in out_a.glob("overlay_*.pgm"))
    names_b = sorted(p.name for p in out_b.glob("overlay_*.pgm"))
    same = same and names_a == names_b and len(names_a) == 10
    for name in names_a:
        same = same and (out_a / name).read_bytes() == (out_b / name).read_bytes()
    elapsed = time.perf_counter() - t0

    assert _report(
        6,
        same,
        f"tracks.csv, frames.csv, and {len(names_a)} overlays byte-identical "
        f"across two runs, {elapsed:.2f}s",
    )


def test_criterion_7_detection_translation_equivariance():
    t0 = time.perf_counter()
    terrain = generate_terrain(909, 256, 256, 40)
    cfg = DetectorConfig(max_features=100)
    corners = detect_features(terrain, cfg)
    rng = np.random.default_rng(707)

    agree = 0
    non_empty = 0
    for trial in range(50):
        fp = corners[int(rng.integers(0, len(corners)))]
        cx = min(max(int(fp.pos[0]) - 12, 0), 256 - 24)
        cy = min(max(int(fp.pos[1]) - 12, 0), 256 - 24)
        crop = terrain[cy : cy + 24, cx : cx + 24]
        while True:
            dx, dy = int(rng.integers(-4, 5)), int(rng.integers(-4, 5))
            if (dx, dy) != (0, 0):
                break
        base = np.zeros((56, 56))
        moved = np.zeros((56, 56))
        base[12:36, 12:36] = crop
        moved[12 + dy : 36 + dy, 12 + dx : 36 + dx] = crop
        set_base = {(p.pos[0] + dx, p.pos[1] + dy) for p in detect_features(base, cfg)}
        set_moved = {p.pos for p in detect_features(moved, cfg)}
        if set_base == set_moved:
            agree += 1
        if set_moved:
            non_empty += 1
    elapsed = time.perf_counter() - t0

    ok = agree == 50 and non_empty >= 25
    assert _report(
        7,
        ok,
        f"detection sets identical up to shift in {agree}/50 trials "
        f"({non_empty} with at least one point), {elapsed:.2f}s",
    )
