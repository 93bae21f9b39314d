import io
import json
import math

import pytest
from hypothesis import given, strategies as st

from fgsim import cli
from fgsim import sampler as S
from fgsim.errors import ParseError, ValidationError

RZZ_DOC = '{"schema_version":1,"n":2,"elements":[{"type":"gate","id":"rzz","theta":1.5708,"targets":[0,1]}]}'


def run(*argv):
    buf = io.StringIO()
    code = cli.run_command([str(a) for a in argv], out=buf)
    return code, json.loads(buf.getvalue())


def write(tmp_path, name, program):
    path = tmp_path / name
    path.write_text(cli.serialize_circuit(program))
    return path


def test_parse_single_gate():
    prog = cli.parse_circuit_file(RZZ_DOC)
    assert len(prog.elements) == 1
    assert prog.elements[0] == S.make_gate("rzz", (0, 1), (1.5708,))


def test_target_out_of_range():
    doc = RZZ_DOC.replace("[0,1]", "[0,5]")
    with pytest.raises(ValidationError) as e:
        cli.parse_circuit_file(doc)
    assert e.value.element == 0


def test_noisy_channel_binding():
    doc = ('{"schema_version":1,"n":2,"elements":[{"type":"channel","id":"noisy_rzz",'
           '"theta":0.5,"p":0.1,"noise":"zz","targets":[0,1]}]}')
    prog = cli.parse_circuit_file(doc)
    assert cli.parse_circuit_file(cli.serialize_circuit(prog)) == prog
    assert S.element_cost(prog.elements[0], 2) == pytest.approx(1 + 0.8 * math.sin(0.5))


def test_malformed_json_reports_position():
    with pytest.raises(ParseError) as e:
        cli.parse_circuit_file('{"schema_version": 1,\n "n": }')
    assert e.value.line == 2 and e.value.column is not None
    for bad in ('{"n": 1, "n": 2}', '{"schema_version":1,"n":NaN,"elements":[]}'):
        with pytest.raises(ParseError):
            cli.parse_circuit_file(bad)


def test_strict_keys():
    with pytest.raises(ValidationError):
        cli.parse_circuit_file(RZZ_DOC.replace('"targets"', '"extra":1,"targets"'))
    with pytest.raises(ValidationError):
        cli.parse_circuit_file(RZZ_DOC.replace('"schema_version":1', '"schema_version":2'))


def test_decompose_hadamard():
    code, doc = run("decompose", "--gate", "hadamard")
    assert code == 0
    assert doc["extent"] == pytest.approx(2.0)
    assert [round(abs(complex(t[0], t[1])), 8) for t in doc["terms"]] == [0.70710678] * 2


def test_extent_product(tmp_path):
    prog = S.CircuitProgram(2, [S.make_gate("rzz", (0, 1), (math.pi / 2,))] * 2)
    code, doc = run("extent", "--circuit", write(tmp_path, "two_rzz.json", prog))
    assert code == 0 and doc["product"] == pytest.approx(4.0)


def test_sample_report_shape_and_determinism(tmp_path):
    prog = S.CircuitProgram(3, [S.make_gate("rxx_nn", (0, 1), (0.4,)),
                                S.make_gate("rzz", (1, 2), (0.9,)),
                                S.TerminalMeasure((0, 1, 2))])
    path = write(tmp_path, "c.json", prog)
    argv = ["sample", "--circuit", path, "--mode", "approx", "--delta", 0.05, "--eps", 0.05,
            "--shots", 3, "--seed", 5]
    code, doc = run(*argv)
    assert code == 0
    rep = doc["reports"][0]
    assert {"k", "E", "probs", "bitstring"} <= rep.keys()
    assert len(rep["probs"]) == 3 and rep["k"] >= 1
    _, again = run(*argv)

    def strip(d):
        d = dict(d)
        d.pop("timing", None)
        d["reports"] = [{k: v for k, v in r.items() if k != "timing"} for r in d["reports"]]
        return d
    assert strip(doc) == strip(again)


def test_exit_codes(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert run("extent", "--circuit", bad)[0] == 2
    assert run("extent", "--circuit", tmp_path / "missing.json")[0] == 2
    assert cli.run_command(["nonsense"], out=io.StringIO()) == 2
    big = S.CircuitProgram(2, [S.make_gate("rzz", (0, 1), (math.pi / 2,))] * 20)
    code, doc = run("norm", "--circuit", write(tmp_path, "big.json", big))
    assert code == 3 and doc["error"] == "ResourceLimit"


angles = st.floats(-6.0, 6.0, allow_nan=False)


@st.composite
def programs(draw):
    n = draw(st.integers(2, 4))
    els = []
    for _ in range(draw(st.integers(0, 6))):
        kind = draw(st.sampled_from(["rz", "rxx_nn", "h", "rzz", "noisy_rzz", "noisy_rot"]))
        q = draw(st.integers(0, n - 2))
        if kind == "rz":
            els.append(S.make_gate("rz", (q,), (draw(angles),)))
        elif kind == "h":
            els.append(S.make_gate("h", (q,)))
        elif kind in ("rxx_nn", "rzz"):
            els.append(S.make_gate(kind, (q, q + 1), (draw(angles),)))
        elif kind == "noisy_rzz":
            els.append(S.make_channel("noisy_rzz", draw(angles), draw(st.floats(0, 0.5)),
                                      (q, q + 1), noise=draw(st.sampled_from(S.RZZ_NOISE)),
                                      adaptive=draw(st.booleans())))
        else:
            els.append(S.make_channel("noisy_rot", draw(angles), draw(st.floats(0, 0.5)),
                                      (q,), axis=draw(st.sampled_from(["x", "y"]))))
    if draw(st.booleans()):
        els.append(S.TerminalMeasure(tuple(range(n))))
    return S.CircuitProgram(n, els)


@given(programs())
def test_round_trip(prog):
    text = cli.serialize_circuit(prog)
    back = cli.parse_circuit_file(text)
    assert back == prog
    assert cli.serialize_circuit(back) == text
