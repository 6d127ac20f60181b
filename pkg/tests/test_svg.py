import xml.etree.ElementTree as ET

import pytest

from sqlab.errors import DomainError
from sqlab.svg import Series, emit_svg, render_svg

NS = "{http://www.w3.org/2000/svg}"


def test_single_point():
    doc = render_svg([Series("one", [1.0], [2.0])], xlabel="x axis", ylabel="y axis")
    root = ET.fromstring(doc)
    assert root.tag == NS + "svg" and root.get("version") == "1.1"
    assert len(root.findall(f"{NS}circle")) == 1
    texts = [t.text for t in root.iter(f"{NS}text")]
    assert "x axis" in texts and "y axis" in texts


def test_loglog_decay_plot(tmp_path):
    s = [Series("q=1009", [6, 32, 1009], [0.4, 0.2, 0.03]), Series("q=10007", [10, 101, 10007], [0.3, 0.1, 0.01])]
    path = emit_svg(s, tmp_path / "d.svg", logx=True, logy=True, title="decay <&>")
    root = ET.parse(path).getroot()
    assert len(root.findall(f"{NS}polyline")) == 2
    assert len(root.findall(f"{NS}circle")) == 6


def test_byte_identical(tmp_path):
    s = [Series("a", [1, 2, 3], [3.0, 1.0, 2.0])]
    emit_svg(s, tmp_path / "a.svg")
    emit_svg(s, tmp_path / "b.svg")
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()


def test_validation():
    with pytest.raises(DomainError):
        render_svg([])
    with pytest.raises(DomainError):
        render_svg([Series("e", [], [])])
    with pytest.raises(DomainError):
        render_svg([Series("bad", [1, 2], [1])])
    with pytest.raises(DomainError):
        render_svg([Series("nan", [1], [float("nan")])])
    with pytest.raises(DomainError):
        render_svg([Series("neg", [1], [-1.0])], logy=True)
