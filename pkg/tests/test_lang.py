import pytest

from invmine.lang import ModelError, parse, parse_expr, parse_formula, pretty_print, state_space_size
from invmine.lang.ast import Binary, IntLit, Name

from conftest import CORPUS


@pytest.mark.parametrize("path", sorted(CORPUS.glob("*.mpl")), ids=lambda p: p.stem)
def test_pretty_print_round_trips(path):
    m = parse(path.read_text())
    again = parse(pretty_print(m))
    assert again == m
    assert pretty_print(again) == pretty_print(m)


def test_peterson_shape(peterson):
    assert peterson.n_procs == 2
    assert [s.name for s in peterson.slots] == ["_pc[0]", "_pc[1]", "flag[0]", "flag[1]", "turn", "ncrit"]
    # eight statements plus the terminal position
    assert tuple(peterson.pc_sizes()) == (9, 9)


def test_state_space_size(peterson, toggle):
    assert state_space_size(peterson) == 9 * 9 * 2 * 2 * 2 * 256
    assert state_space_size(toggle) == 2 * 2 * 2


def test_precedence():
    e = parse_expr("a + 1 * 2 == 3 || b")
    assert e.op == "||"
    assert e.left == Binary("==", Binary("+", Name("a"), Binary("*", IntLit(1), IntLit(2))), IntLit(3))


def test_implication_is_right_associative():
    e = parse_expr("a -> b -> c")
    assert e.left == Name("a")
    assert e.right.op == "->"


def test_increment_desugars():
    m = parse("byte x; proc { x++; x--; }")
    a, b = m.processes[0].body
    assert a.value.op == "+" and b.value.op == "-"


def test_replicated_processes_get_pids():
    m = parse("bool f[3]; proc replicate 3 { f[_pid] = 1; }")
    assert m.n_procs == 3
    assert [p.pid for p in m.processes] == [0, 1, 2]


def test_enum_and_ranges():
    m = parse("enum {idle, busy} st[2] = {busy, idle}; int[2..5] k = 3; proc { st[0] = idle; k = k + 1; }")
    assert m.init_vals[:2] == (1, 0)
    assert m.init_vals[2] == 3


@pytest.mark.parametrize(
    "src,kind,where",
    [
        ("bool a; proc { a = 1 $ 2; }", "lex", "1:22"),
        ("bool a; proc { a = ; }", "parse", "1:20"),
        ("bool a; proc { b = 1; }", "unknown-variable", "1:16"),
        ("enum {x,y} e; proc { e = 1 + e; }", "type", "1:28"),
        ("bool a; proc { goto nowhere; }", "goto", "1:16"),
        ("bool a; bool a; proc { a = 1; }", "duplicate", "1:14"),
        ("int[0..3] a = 7; proc { a = 1; }", "range", "1:15"),
        ("bool a; /* never closed", "lex", "1:9"),
    ],
)
def test_diagnostics(src, kind, where):
    with pytest.raises(ModelError) as info:
        parse(src)
    assert info.value.kind == kind
    assert info.value.format("m.mpl").startswith(f"m.mpl:{where}: ")


def test_label_only_body_rejected():
    with pytest.raises(ModelError):
        parse("bool a; proc { l: }")


def test_formula_may_mention_pcs(peterson):
    e = parse_formula("_pc[0] == 3 -> ncrit <= 1", peterson)
    assert e.op == "->"
    with pytest.raises(ModelError):
        parse_formula("_pid == 0", peterson)
    with pytest.raises(ModelError):
        parse_formula("nosuch == 0", peterson)
