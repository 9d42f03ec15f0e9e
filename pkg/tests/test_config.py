import pytest

from gravclock.config import config_hash, parse_config, parse_sections
from gravclock.errors import ParseError, ValidationError
from gravclock.model import Harmonic

MINIMAL = """
[clock]
levels = [0, 0.1]

[potential]
kind = harmonic

[grid]
x_min = -16
x_max = 24
n = 256

[evolution]
dt = 1e-2
steps = 100

[scenario]
kind = fixed_height_clocks
separation = 5
"""


def test_minimal_config_fills_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.record_every == 10
    assert dict(cfg.tolerances) == {"shift": 1e-4}
    assert (cfg.constants.c, cfg.constants.g, cfg.constants.hbar, cfg.constants.m) == (10, 1, 1, 1)
    assert cfg.potential == Harmonic(0.0, 1.0)
    assert cfg.params.sigma == pytest.approx(0.5 ** 0.5)


def test_complex_amplitudes():
    text = MINIMAL.replace("levels = [0, 0.1]", "levels = [0, 0.1]\namplitudes = [0.6, 0, 0, 0.8]")
    assert parse_config(text).clock.amplitudes == (0.6, 0.8j)


def test_approximation_breach_is_validation_error():
    text = MINIMAL.replace("levels = [0, 0.1]", "levels = [0, 20]")
    with pytest.raises(ValidationError, match="ApproximationBreach"):
        parse_config(text)


def test_amplitude_arity_mismatch():
    text = MINIMAL.replace("levels = [0, 0.1]", "levels = [0, 0.1]\namplitudes = [1,0]")
    with pytest.raises(ParseError, match="arity") as err:
        parse_config(text)
    assert err.value.line == 4 and err.value.column == 14


def test_odd_amplitude_list():
    text = MINIMAL.replace("levels = [0, 0.1]", "levels = [0, 0.1]\namplitudes = [1, 0, 0]")
    with pytest.raises(ParseError, match="pairs"):
        parse_config(text)


@pytest.mark.parametrize("bad, line, column", [
    ("[grid]\nx_min = -1\nwidth = 3\n", 3, 1),
    ("[gird]\n", 1, 1),
    ("[grid]\n  nonsense\n", 2, 3),
    ("n = 8\n", 1, 1),
    ("[grid]\nn = 8\nn = 16\n", 3, 1),
    ("[grid]\nn =\n", 2, 4),
])
def test_syntax_errors_carry_position(bad, line, column):
    with pytest.raises(ParseError) as err:
        parse_sections(bad)
    assert (err.value.line, err.value.column) == (line, column)
    assert f"line {line}, column {column}" in str(err.value)


def test_value_errors_carry_position():
    text = MINIMAL.replace("dt = 1e-2", "dt = fast")
    with pytest.raises(ParseError) as err:
        parse_config(text)
    assert err.value.line == 14 and err.value.column == 6
    with pytest.raises(ParseError):
        parse_config(MINIMAL.replace("n = 256", "n = 256.5"))
    with pytest.raises(ParseError):
        parse_config(MINIMAL.replace("dt = 1e-2", "dt = nan"))
    with pytest.raises(ParseError):
        parse_config(MINIMAL.replace("levels = [0, 0.1]", "levels = 0, 0.1"))


def test_inapplicable_keys_rejected():
    with pytest.raises(ValidationError, match="omega"):
        parse_config(MINIMAL.replace("kind = harmonic", "kind = hard_floor\nomega = 2"))
    with pytest.raises(ValidationError, match="momenta"):
        parse_config(MINIMAL.replace("separation = 5", "separation = 5\nmomenta = [1]"))
    with pytest.raises(ValidationError, match="tol_fidelity"):
        parse_config(MINIMAL.replace("separation = 5", "separation = 5\ntol_fidelity = 1e-3"))


def test_missing_and_invalid_fields():
    with pytest.raises(ValidationError, match="dt"):
        parse_config(MINIMAL.replace("dt = 1e-2\n", ""))
    with pytest.raises(ValidationError) as err:
        parse_config(MINIMAL.replace("n = 256", "n = 100"))
    assert err.value.field == "grid"
    with pytest.raises(ValidationError, match="potential"):
        parse_config(MINIMAL.replace("kind = harmonic", "kind = zero"))
    with pytest.raises(ParseError, match="unknown potential"):
        parse_config(MINIMAL.replace("kind = harmonic", "kind = well"))


def test_tolerance_override():
    cfg = parse_config(MINIMAL.replace("separation = 5", "separation = 5\ntol_shift = 1e-6"))
    assert cfg.tolerance("shift") == 1e-6


def test_hash_ignores_layout_and_comments():
    noisy = "# a comment\n" + MINIMAL.replace("n = 256", "n    =   256   ; trailing") \
        .replace("[grid]", "  [ grid ]  # grid") + "\n\n"
    assert config_hash(parse_config(noisy)) == config_hash(parse_config(MINIMAL))
    # spelling out a default is not a semantic change
    explicit = MINIMAL.replace("steps = 100", "steps = 100\nrecord_every = 10")
    assert config_hash(parse_config(explicit)) == config_hash(parse_config(MINIMAL))


@pytest.mark.parametrize("old, new", [
    ("n = 256", "n = 512"),
    ("steps = 100", "steps = 101"),
    ("separation = 5", "separation = 5.5"),
    ("levels = [0, 0.1]", "levels = [0, 0.2]"),
    ("kind = harmonic", "kind = harmonic\nomega = 1.1"),
    ("[clock]", "[units]\nc = 11\n[clock]"),
    ("separation = 5", "separation = 5\ntol_shift = 2e-4"),
    ("separation = 5", "separation = 5\nsigma = 0.8"),
])
def test_hash_tracks_semantic_changes(old, new):
    assert config_hash(parse_config(MINIMAL.replace(old, new))) != config_hash(parse_config(MINIMAL))
