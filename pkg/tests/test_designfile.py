import csv
import json
from pathlib import Path

import pytest

from acoustic_ladder.errors import SchemaError
from acoustic_ladder.formats import load_fixture, read_design, read_spec, write_design
from acoustic_ladder.formats.designfile import FIXTURES, fixture_path, fragment_to_bytes
from acoustic_ladder.network import FrequencyGrid, Stage

DATA = Path(__file__).parent / "data"


def golden_rows():
    with open(DATA / "golden_tables.tsv", newline="") as fh:
        return list(csv.DictReader(fh, delimiter="\t"))


def eng(x):
    return f"{x:.12g}"


def fixture_json(name):
    return json.loads(fixture_path(name).read_text())


def mutate(name, edit):
    obj = fixture_json(name)
    edit(obj)
    return json.dumps(obj, indent=2)


class TestFixtures:
    def test_golden_tables(self):
        rows = golden_rows()
        assert len(rows) == 18
        docs = {name: load_fixture(name) for name in FIXTURES}
        for row in rows:
            m = docs[row["table"]].resonators[row["resonator"]]
            b = next(b for b in m.branches if b.label == row["mode"])
            got = {
                "c0_ff": eng(m.c0 * 1e15),
                "fs_ghz": eng(b.fs / 1e9),
                "q": eng(b.q),
                "k2_pct": eng(b.k2 * 100),
                "ls_nh": eng(m.ls * 1e9) if m.ls else "-",
                "rs_ohm": eng(m.rs) if m.rs else "-",
            }
            for key, value in got.items():
                assert value == row[key], (row["table"], row["resonator"], row["mode"], key)

    def test_raw_file_strings(self):
        # the checked-in files carry the table values verbatim
        for row in golden_rows():
            obj = fixture_json(row["table"])["resonators"][row["resonator"]]
            br = next(b for b in obj["branches"] if b["mode"] == row["mode"])
            assert str(obj["c0_ff"]) == row["c0_ff"]
            assert [str(br[k]) for k in ("fs_ghz", "q", "k2_pct")] == [row["fs_ghz"], row["q"], row["k2_pct"]]

    def test_table4_si_values(self, table4):
        sh = table4.resonators["shunt_a"]
        assert sh.c0 == 174e-15
        assert sh.ls == 0.19e-9
        assert sh.rs == 5.0
        assert [b.fs for b in sh.branches] == [11.4e9, 17.2e9, 22.7e9]
        assert [b.k2 for b in sh.branches] == [0.028, 0.46, 0.019]
        assert [b.q for b in sh.branches] == [12.9, 18.9, 46.6]

    def test_table3_si_values(self, table3):
        assert [b.fs for b in table3.resonators["shunt_b"].branches] == [11.5e9, 17.1e9, 22.5e9]
        assert table3.resonators["shunt_b"].c0 == 44.5e-15
        assert table3.resonators["series"].rs == 0.0 == table3.resonators["series"].ls

    def test_thickness_metadata(self, table4):
        assert table4.resonators["series"].meta.ln_thickness_nm == 260
        assert table4.resonators["shunt_a"].meta.ln_thickness_nm == 310
        assert table4.resonators["shunt_a"].meta.electrode_pairs == 19.5

    def test_sweep_and_spec(self, table3, table4):
        assert table3.grid == FrequencyGrid(5e9, 35e9, 3001)
        assert table4.spec.target_fc == 19.3e9
        assert table4.spec.min_fbw == 0.085
        assert table3.spec.min_fbw == 0.096
        assert table4.stages[1] == Stage("shunt", "shunt_b")

    @pytest.mark.parametrize("name", FIXTURES)
    def test_write_read_identity(self, name):
        raw = fixture_path(name).read_bytes()
        doc = read_design(raw)
        assert write_design(doc) == raw
        assert read_design(write_design(doc)) == doc

    def test_unknown_fixture(self):
        with pytest.raises(KeyError):
            fixture_path("table5")


class TestSchemaErrors:
    def test_k2_out_of_range(self):
        text = mutate("table3", lambda o: o["resonators"]["series"]["branches"][1].__setitem__("k2_pct", 120))
        with pytest.raises(SchemaError) as err:
            read_design(text)
        assert err.value.path == ("resonators", "series", "branches", 1, "k2_pct")
        assert "k2_pct" in str(err.value)
        line = text.splitlines()[err.value.line - 1]
        assert '"k2_pct": 120' in line

    def test_unknown_key(self):
        text = mutate("table4", lambda o: o["sweep"].__setitem__("step_ghz", 0.01))
        with pytest.raises(SchemaError, match="unknown key") as err:
            read_design(text)
        assert err.value.path == ("sweep",)
        assert err.value.line is not None
        assert "step_ghz" in str(err.value)

    def test_missing_field(self):
        text = mutate("table4", lambda o: o["resonators"]["shunt_a"].pop("c0_ff"))
        with pytest.raises(SchemaError, match="c0_ff") as err:
            read_design(text)
        assert err.value.path == ("resonators", "shunt_a")
        assert '"shunt_a"' in text.splitlines()[err.value.line - 1]

    def test_unit_suffix_required(self):
        text = mutate("table4", lambda o: o["resonators"]["series"].__setitem__("c0", 96))
        with pytest.raises(SchemaError, match="unknown key"):
            read_design(text)

    def test_unknown_stage_resonator(self):
        text = mutate("table4", lambda o: o["stages"][3].__setitem__("resonator", "shunt_c"))
        with pytest.raises(SchemaError, match="shunt_c") as err:
            read_design(text)
        assert err.value.path == ("stages", 3, "resonator")

    def test_wrong_format_tag(self):
        text = mutate("table4", lambda o: o.__setitem__("format", "ads"))
        with pytest.raises(SchemaError):
            read_design(text)

    def test_json_syntax_error(self):
        text = fixture_path("table4").read_text().replace('"z0_ohm": 50,', '"z0_ohm": 50', 1)
        with pytest.raises(SchemaError, match="invalid JSON") as err:
            read_design(text)
        assert err.value.line == 7
        assert err.value.column is not None

    def test_bad_sweep(self):
        text = mutate("table4", lambda o: o["sweep"].__setitem__("stop_ghz", 1))
        with pytest.raises(SchemaError) as err:
            read_design(text)
        assert err.value.path == ("sweep",)

    def test_variables_outside_bounds(self):
        def edit(o):
            o["variables"] = {"fs_scale": {"series": 1.2}}
        with pytest.raises(SchemaError, match="outside"):
            read_design(mutate("table4", edit))


class TestSpecFile:
    def test_read(self):
        spec = read_spec('{"target_fc_ghz": 19.3, "min_fbw_pct": 8.5, "max_il_db": 2.2,'
                         ' "rejection": [{"start_ghz": 15, "stop_ghz": 17.5, "min_db": 30}]}')
        assert spec.target_fc == 19.3e9
        assert spec.rejection[0].band == (15e9, 17.5e9)

    def test_rejection_rule_exclusive(self):
        with pytest.raises(SchemaError):
            read_spec('{"target_fc_ghz": 19.3, "min_fbw_pct": 8.5, "max_il_db": 2.2,'
                      ' "rejection": [{"offset_bw": 2, "start_ghz": 15, "stop_ghz": 17.5, "min_db": 30}]}')

    def test_weights(self):
        spec = read_spec('{"target_fc_ghz": 19.3, "min_fbw_pct": 8.5, "max_il_db": 2.2, "weights": {"fc": 5}}')
        assert spec.weights.fc == 5.0 and spec.weights.il == 1.0


def test_fragment(table3):
    obj = json.loads(fragment_to_bytes({"series": table3.resonators["series"]}))
    assert obj["resonators"]["series"]["c0_ff"] == 90
    doc = read_design(fragment_to_bytes(table3.resonators))
    assert doc.resonators == table3.resonators
    assert doc.stages == ()
