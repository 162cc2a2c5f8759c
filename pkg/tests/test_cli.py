import pytest

from nlvc import transformer_core
from nlvc.cli import run
from nlvc.frame_io import read_y4m, write_y4m
from nlvc.synthetic import moving_square_video

from conftest import frames_equal


@pytest.fixture
def clip(tmp_path):
    header, frames = moving_square_video(64, 48, 4)
    path = tmp_path / "clip.y4m"
    write_y4m(path, header, frames)
    return path, frames


def test_verify_is_lossless(clip, capsys):
    path, _ = clip
    assert run(["verify", str(path), "--model", "adaptive", "--delta", "1"]) == 0
    assert "LOSSLESS: OK" in capsys.readouterr().out


def test_encode_decode_cycle(clip, tmp_path, capsys):
    path, frames = clip
    compressed = tmp_path / "clip.nlvc"
    restored = tmp_path / "restored.y4m"
    report = tmp_path / "report.csv"
    assert run(["encode", str(path), str(compressed),
                "--model", "adaptive", "--report", str(report)]) == 0
    assert run(["decode", str(compressed), str(restored)]) == 0
    _, out = read_y4m(restored)
    assert frames_equal(frames, out)
    header_line = report.read_text().splitlines()[0]
    assert header_line == "frame,type,plane,patch_row,patch_col,bits"


def test_decoded_y4m_preserves_header_tags(clip, tmp_path):
    path, _ = clip
    compressed = tmp_path / "clip.nlvc"
    restored = tmp_path / "restored.y4m"
    run(["encode", str(path), str(compressed)])
    run(["decode", str(compressed), str(restored)])
    assert path.read_bytes().split(b"\n", 1)[0] == restored.read_bytes().split(b"\n", 1)[0]


def test_info_reports_delta_and_groups(clip, tmp_path, capsys):
    path, _ = clip
    compressed = tmp_path / "clip.nlvc"
    run(["encode", str(path), str(compressed), "--delta", "1"])
    capsys.readouterr()
    assert run(["info", str(compressed)]) == 0
    out = capsys.readouterr().out
    assert "delta: 1 (63 groups)" in out
    assert "model: uniform" in out


def test_stats_emits_both_csvs(clip, capsys):
    path, _ = clip
    assert run(["stats", str(path)]) == 0
    out = capsys.readouterr().out
    assert "source,token_kind,bits_per_token,rate_percent" in out
    assert "frame,rate_percent" in out
    assert ",iframe," in out
    assert ",pframe," in out


def test_transformer_requires_weights(clip, tmp_path, capsys):
    path, _ = clip
    code = run(["encode", str(path), str(tmp_path / "x.nlvc"), "--model", "transformer"])
    assert code == 2


def test_transformer_cycle_with_weights(clip, tmp_path, tiny_weights):
    path, frames = clip
    wpath = tmp_path / "model.nlvw"
    transformer_core.write_weights(wpath, tiny_weights)
    compressed = tmp_path / "clip.nlvc"
    restored = tmp_path / "restored.y4m"
    assert run(["encode", str(path), str(compressed), "--model", "transformer",
                "--weights", str(wpath), "--delta", "0"]) == 0
    assert run(["decode", str(compressed), str(restored),
                "--weights", str(wpath)]) == 0
    _, out = read_y4m(restored)
    assert frames_equal(frames, out)
    assert run(["verify", str(path), "--model", "transformer",
                "--weights", str(wpath), "--delta", "0"]) == 0


def test_decode_without_weights_fails_cleanly(clip, tmp_path, tiny_weights, capsys):
    path, _ = clip
    wpath = tmp_path / "model.nlvw"
    transformer_core.write_weights(wpath, tiny_weights)
    compressed = tmp_path / "clip.nlvc"
    run(["encode", str(path), str(compressed), "--model", "transformer",
         "--weights", str(wpath), "--delta", "0"])
    assert run(["decode", str(compressed), str(tmp_path / "out.y4m")]) == 1
    assert "error" in capsys.readouterr().err


def test_missing_input_is_runtime_error(tmp_path, capsys):
    assert run(["encode", str(tmp_path / "absent.y4m"), str(tmp_path / "o.nlvc")]) == 1


def test_usage_error_exit_code():
    assert run(["encode"]) == 2
    assert run(["no-such-command"]) == 2


def test_make_fixtures(tmp_path, capsys):
    out = tmp_path / "fixtures"
    assert run(["make-fixtures", str(out)]) == 0
    names = {p.name for p in out.iterdir()}
    assert "moving_square_96x96.y4m" in names
    assert len(names) >= 5
    header, frames = read_y4m(out / "constant_96x96.y4m")
    assert header.width == 96 and len(frames) == 8


def test_threads_env_fallback(clip, tmp_path, monkeypatch):
    path, frames = clip
    monkeypatch.setenv("NLVC_THREADS", "3")
    compressed = tmp_path / "c.nlvc"
    assert run(["encode", str(path), str(compressed), "--model", "adaptive"]) == 0
    restored = tmp_path / "r.y4m"
    assert run(["decode", str(compressed), str(restored)]) == 0
    _, out = read_y4m(restored)
    assert frames_equal(frames, out)
