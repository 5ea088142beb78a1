import pytest

from vdpconley.conley import AXIOM_HOMOLOGY, Entry
from vdpconley.scenario import PRESETS, ScenarioError, load_preset, parse_scenario, run_scenario

MINIMAL = """\
[meta]
name = two-sinks
theta_before = 0
theta_after = 1

[elements before]
a = sink
b = saddle
[order before]
a < b
[index before]
a = sink
b = saddle
[connections before]
a <- b

[elements after]
a = sink
[index after]
a = sink

[constraints]
T(a,a) = iso
"""


def test_minimal_scenario_parses_and_runs():
    sc = parse_scenario(MINIMAL)
    assert sc.name == "two-sinks" and sc.bracket == (0.0, 1.0)
    assert sc.delta_before.entry("a", "b", 1) == 1
    assert sc.constraint.values[("a", "a", 0)] is Entry.ISO
    res = run_scenario(sc)
    assert res.valid and res.solution is not None


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_presets_are_valid(name):
    res = run_scenario(load_preset(name))
    assert res.valid and len(res.certificates) == 1


@pytest.mark.parametrize(
    "old,new,fragment",
    [
        ("b = saddle\n[connections", "b = blob\n[connections", "blob"),
        ("a <- b", "a <- zz", "unknown element 'zz'"),
        ("[meta]", "[bogus]", "unknown section"),
        ("T(a,a) = iso", "T(q,a) = iso", "not an element before"),
        ("T(a,a) = iso", "T(a,a) = maybe", "maybe"),
    ],
)
def test_errors_carry_line_numbers(old, new, fragment):
    bad = MINIMAL.replace(old, new, 1)
    line = bad[: bad.index(new)].count("\n") + 1
    with pytest.raises(ScenarioError) as info:
        parse_scenario(bad, source="s.txt")
    assert info.value.line == line
    assert str(info.value).startswith(f"s.txt:{line}: ") and fragment in str(info.value)


def test_missing_section_and_index():
    with pytest.raises(ScenarioError, match=r"\[elements after\]"):
        parse_scenario(MINIMAL.split("[elements after]")[0])
    with pytest.raises(ScenarioError, match="no entry for"):
        parse_scenario(MINIMAL.replace("b = saddle\n[connections", "[connections"))
    with pytest.raises(ScenarioError, match="content before"):
        parse_scenario("x = 1\n" + MINIMAL)


def test_prescribed_interval_is_checked():
    text = MINIMAL.replace("[elements after]", "[intervals before]\n{a, b} = sink\n\n[elements after]")
    res = run_scenario(parse_scenario(text))
    assert not res.valid and res.solution is None
    assert res.report_before.violations[0].axiom == AXIOM_HOMOLOGY
    ok = MINIMAL.replace("[elements after]", "[intervals before]\n{a, b} = none\n\n[elements after]")
    assert run_scenario(parse_scenario(ok)).valid


def test_unknown_preset():
    with pytest.raises(ScenarioError, match="unknown preset"):
        load_preset("nope")
