import numpy as np
import pytest

from hv3d.videoio import DepthMap, Frame, Plane, RatingsTable, StereoFrame, rgb_to_frame


def natural_rgb(name):
    import skimage.data

    return getattr(skimage.data, name)().astype(np.float64)


NATURAL = ("astronaut", "chelsea", "coffee")


def stereo_from_rgb(rgb, disparity=4, width=None, depth=None):
    """Left view is the image, right view is the image shifted left by ``disparity``.

    A left-view point at x then sits at x - disparity in the right view.
    """
    w = (width or rgb.shape[1] - disparity) // 2 * 2
    h = rgb.shape[0] // 2 * 2
    left = rgb_to_frame(rgb[:h, :w])
    right = rgb_to_frame(rgb[:h, disparity : disparity + w])
    return StereoFrame(left, right, depth)


def textured_stereo(rng, width=64, height=64, disparity=4, depth=None):
    tex = rng.integers(0, 256, size=(height, width + disparity)).astype(np.float64)
    rgb = np.repeat(tex[..., None], 3, axis=2)
    rgb[..., 0] = rng.integers(0, 256, size=tex.shape)
    return stereo_from_rgb(rgb, disparity, width, depth)


def add_noise(frame, sigma, rng):
    return Frame(*(Plane(p.samples + rng.normal(0.0, sigma, p.shape)) for p in frame.planes()))


def noisy_stereo(pair, sigma, rng):
    return StereoFrame(add_noise(pair.left, sigma, rng), add_noise(pair.right, sigma, rng))


def flat_depth(w, h, value=128):
    return DepthMap(Plane(np.full((h, w), value, dtype=np.uint8)))


def ramp_depth(w, h):
    yy, xx = np.mgrid[0:h, 0:w]
    return DepthMap(Plane(((xx * 3 + yy * 2) % 256).astype(np.uint8)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def luma_frame(y, chroma=128.0):
    y = np.asarray(y, dtype=np.float64)
    h, w = (y.shape[0] + 1) // 2, (y.shape[1] + 1) // 2
    return Frame(Plane(y), Plane(np.full((h, w), chroma)), Plane(np.full((h, w), chroma)))


def luma_stereo(left, right, depth=None):
    return StereoFrame(luma_frame(left), luma_frame(right), depth)


def write_dataset(root, n_seq=2, rate_points=("QP25", "QP30"), width=32, height=32, frames=1,
                  seed=0, with_depth=True, identity=False):
    """Write a small synthetic dataset and its manifest under ``root``.

    Rate point ``k`` adds Gaussian noise of sigma ``3 * (k + 1)`` to both views.
    Returns the manifest path.
    """
    import json

    from hv3d.videoio import write_depth, write_yuv420

    r = np.random.default_rng(seed)
    root.mkdir(parents=True, exist_ok=True)
    entries = []
    for s in range(n_seq):
        sid = f"S{s + 1:02d}"
        refs = [textured_stereo(r, width, height) for _ in range(frames)]
        write_yuv420(root / f"{sid}_L.yuv", [p.left for p in refs])
        write_yuv420(root / f"{sid}_R.yuv", [p.right for p in refs])
        if with_depth:
            write_depth(root / f"{sid}_D.raw", [ramp_depth(width, height).plane for _ in refs])
        for k, rp in enumerate(rate_points):
            dist = refs if identity else [noisy_stereo(p, 3.0 * (k + 1), r) for p in refs]
            write_yuv420(root / f"{sid}_{rp}_L.yuv", [p.left for p in dist])
            write_yuv420(root / f"{sid}_{rp}_R.yuv", [p.right for p in dist])
            e = {
                "sequence_id": sid, "class_label": "AB"[s % 2], "rate_point_label": rp,
                "ref_left_path": f"{sid}_L.yuv", "ref_right_path": f"{sid}_R.yuv",
                "dist_left_path": f"{sid}_{rp}_L.yuv", "dist_right_path": f"{sid}_{rp}_R.yuv",
                "width": width, "height": height, "frame_count": frames,
            }
            if with_depth:
                e["ref_depth_path"] = f"{sid}_D.raw"
            entries.append(e)
    path = root / "manifest.json"
    path.write_text(json.dumps({"dataset_id": "synthetic", "entries": entries}, indent=2))
    return path


def inverted_panel(n_items=32, n_subj=18, bad=7):
    """Consistent raters spread by up to +/-2 around the item quality; one rater reports 10 - x.

    The spread keeps each item's kurtosis in the normal range once the
    inverted rating is added, so the 2-sigma bounds apply.
    """
    levels = (2.0, 3.0, 7.0, 8.0)
    truth = np.array([levels[j % 4] for j in range(n_items)])
    offsets = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
    scores = np.empty((n_items, n_subj))
    for i in range(n_subj):
        scores[:, i] = np.clip(truth + offsets[(i + np.arange(n_items)) % 5], 1, 10)
    scores[:, bad] = 10 - truth
    items = [f"item{j:02d}" for j in range(n_items)]
    subjects = [f"obs{i:02d}" for i in range(n_subj)]
    return RatingsTable(items, subjects, scores)


# -- acceptance reporting ------------------------------------------------------

_ACCEPTANCE = pytest.StashKey()


class _Criterion:
    def __init__(self, lines, number, title):
        self.lines, self.number, self.title, self.detail = lines, number, title, ""

    def __enter__(self):
        import time

        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        import time

        dt = time.perf_counter() - self.t0
        status = "PASS" if exc_type is None else "FAIL"
        why = self.detail if exc_type is None else f"{self.detail} {exc_type.__name__}: {exc}".strip()
        why = " ".join(str(why).split())[:220]
        self.lines[self.number] = f"criterion {self.number:>2} {status}  {self.title} ({dt:.2f} s) {why}"
        print(self.lines[self.number])
        return False


@pytest.fixture
def criterion(request):
    lines = request.config.stash.setdefault(_ACCEPTANCE, {})
    return lambda number, title: _Criterion(lines, number, title)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
