import pytest

from dualjet.config import ConfigError, load_config, parse_config

GOOD = """\
[space]
kind = electrodynamics
n = 2
k = 3
m = 2.0          # mass
gamma = 1 + x1^2, 0; 0, 1

[suite]
name = metric
seed = 7
points = 5

[integrate]
t1 = 0.5
step = 0.01
x0 = 0.1, 0.2
chain = x-only
"""


def test_good_file():
    cfg = parse_config(GOOD, "good.ini")
    assert cfg.kind == "electrodynamics" and (cfg.n, cfg.k) == (2, 3)
    assert cfg.params == {"m": 2.0, "gamma": "1 + x1^2, 0; 0, 1"}
    assert (cfg.suite, cfg.seed, cfg.points) == ("metric", 7, 5)
    assert cfg.integrate == {"t1": 0.5, "step": 0.01, "x0": [0.1, 0.2], "chain": "x-only"}


def _error(text):
    with pytest.raises(ConfigError) as info:
        parse_config(text, "bad.ini")
    return info.value


@pytest.mark.parametrize("text,line,fragment", [
    ("[space]\nkind = flat\n[colors]\nred = 1\n", 3, "unknown section"),
    ("[space]\nkind = nope\n", 2, "unknown space kind"),
    ("[space]\nkind = flat\nn = two\n", 3, "n must be an integer"),
    ("[space]\nkind = flat\nk = 1\n", 3, "out of range"),
    ("[space]\nkind = electrodynamics\n\nm = heavy\n", 4, "must be a number"),
    ("[space]\nkind = electrodynamics\nwidth = 3\n", 3, "unknown parameter"),
    ("[space]\nkind = custom_expr\nhamiltonian = sqrt(p1^2 + p2^2\n", 3, "hamiltonian:"),
    ("[space]\nkind = flat\n[suite]\nname = everything\n", 4, "unknown suite"),
    ("[space]\nkind = flat\n[suite]\nseed = x\n", 4, "bad value"),
    ("[space]\nkind = flat\n[integrate]\nstep = -1\n", 4, "must be positive"),
    ("[space]\nkind = flat\n[integrate]\nx0 = 1, 2, 3\n", 4, "needs 2 entries"),
    ("[space]\nkind = flat\n[integrate]\nchain = both\n", 4, "chain must be one of"),
    ("[space]\nkind = flat\nkind = flat\n", 3, "kind"),
    ("kind = flat\n", 1, "[section]"),
    ("[space]\nn = 2\n", 1, "needs a kind"),
])
def test_errors_carry_location(text, line, fragment):
    err = _error(text)
    assert err.line == line
    assert fragment in str(err)
    assert str(err).startswith(f"bad.ini:{line}: ")


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "absent.ini")


def test_load_from_disk(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text(GOOD)
    assert load_config(path).path == path
