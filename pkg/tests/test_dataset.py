import pytest

from agrorec.dataset import (
    CleaningConfig,
    CleaningRule,
    Schema,
    clean_dataset,
    ingest_files,
    merge_sources,
    normalize_keys,
    parse_csv,
    read_cleaned_csv,
    summarize_columns,
    write_cleaned_csv,
)
from agrorec.errors import (
    EmptyDataset,
    EmptyJoin,
    HeaderMismatch,
    MissingFile,
    RaggedRow,
    TooMuchMissing,
    TypeCoercion,
)

from conftest import (
    ECON_HEADER_LINE,
    ENV_HEADER_LINE,
    econ_line,
    env_line,
    record,
    toy_dataset,
    write_econ,
    write_env,
)


class TestParseCsv:
    def test_two_data_lines(self, tmp_path):
        path = write_env(tmp_path / "env.csv", [env_line(), env_line(district="D2")])
        rows = parse_csv(path, Schema.ENVIRONMENTAL)
        assert len(rows) == 2
        assert rows[0]["District Names"] == "D1"

    def test_missing_file(self, tmp_path):
        with pytest.raises(MissingFile):
            parse_csv(tmp_path / "nope.csv", Schema.ENVIRONMENTAL)

    def test_header_missing_crop_names(self, tmp_path):
        header = ENV_HEADER_LINE.replace("Crop Names,", "")
        path = tmp_path / "env.csv"
        path.write_text(header + "\n", encoding="utf-8")
        with pytest.raises(HeaderMismatch) as exc:
            parse_csv(path, Schema.ENVIRONMENTAL)
        assert "Crop Names" in str(exc.value)

    def test_ragged_row_reports_line_number(self, tmp_path):
        path = tmp_path / "env.csv"
        path.write_text(ENV_HEADER_LINE + "\n" + env_line() + "\nbad,row\n", encoding="utf-8")
        with pytest.raises(RaggedRow) as exc:
            parse_csv(path, Schema.ENVIRONMENTAL)
        assert exc.value.line_number == 3

    def test_quoted_comma_in_district(self, tmp_path):
        # hand-built fixture: the quoted field must survive intact
        line = env_line().replace("D1", '"Sri Ganganagar, North"')
        path = tmp_path / "env.csv"
        path.write_text(ENV_HEADER_LINE + "\n" + line + "\n", encoding="utf-8")
        rows = parse_csv(path, Schema.ENVIRONMENTAL)
        assert rows[0]["District Names"] == "Sri Ganganagar, North"


class TestNormalizeKeys:
    def test_paper_aliases(self):
        rows = [{"State Names": "Chattisgarh", "Crop Names": "Bajar"}]
        out, changed, warnings = normalize_keys(rows)
        assert out[0]["State Names"] == "Chhattisgarh"
        assert out[0]["Crop Names"] == "Bajra"
        assert changed == 2 and warnings == []

    def test_canonical_name_unchanged(self):
        rows = [{"State Names": "Punjab", "Crop Names": "Wheat"}]
        out, changed, warnings = normalize_keys(rows)
        assert out == rows and changed == 0

    def test_case_and_whitespace(self):
        rows = [{"State Names": "  punjab ", "Crop Names": "wheat"}]
        out, changed, _ = normalize_keys(rows)
        assert out[0]["State Names"] == "Punjab"
        assert out[0]["Crop Names"] == "Wheat"
        assert changed == 2

    def test_unknown_name_passes_through_with_warning(self):
        rows = [{"State Names": "Atlantis", "Crop Names": "Wheat"}]
        out, _, warnings = normalize_keys(rows)
        assert out[0]["State Names"] == "Atlantis"
        assert any("Atlantis" in w for w in warnings)

    def test_idempotent(self):
        rows = [{"State Names": "Chattisgarh", "Crop Names": "bajar", "Season Names": "whole year"}]
        once, c1, _ = normalize_keys(rows)
        twice, c2, _ = normalize_keys(once)
        assert once == twice and c2 == 0


class TestMergeSources:
    def test_single_exact_match(self):
        ds = merge_sources(
            [dict(zip(ENV_HEADER_LINE.split(","), env_line().split(",")))],
            [dict(zip(ECON_HEADER_LINE.split(","), econ_line().split(",")))],
        )
        assert len(ds) == 1
        rec = ds.records[0]
        assert rec.operational_cost == 5000.0 and rec.msp == 1500.0

    def test_no_match_raises_empty_join(self):
        env = [dict(zip(ENV_HEADER_LINE.split(","), env_line(state="Assam", crop="Jute", year=2013).split(",")))]
        econ = [dict(zip(ECON_HEADER_LINE.split(","), econ_line().split(",")))]
        with pytest.raises(EmptyJoin):
            merge_sources(env, econ)

    def test_broadcast_to_two_districts(self):
        env = [
            dict(zip(ENV_HEADER_LINE.split(","), env_line(district="D1").split(","))),
            dict(zip(ENV_HEADER_LINE.split(","), env_line(district="D2").split(","))),
        ]
        econ = [dict(zip(ECON_HEADER_LINE.split(","), econ_line().split(",")))]
        ds = merge_sources(env, econ)
        assert len(ds) == 2
        assert ds.records[0].operational_cost == ds.records[1].operational_cost == 5000.0

    def test_unmatched_rows_logged(self):
        env = [
            dict(zip(ENV_HEADER_LINE.split(","), env_line().split(","))),
            dict(zip(ENV_HEADER_LINE.split(","), env_line(state="Assam", crop="Jute").split(","))),
        ]
        econ = [dict(zip(ECON_HEADER_LINE.split(","), econ_line().split(",")))]
        ds = merge_sources(env, econ)
        unmatched = [a for a in ds.cleaning_log if a.rule is CleaningRule.UNMATCHED_ROW]
        assert len(unmatched) == 1 and unmatched[0].rows_affected == 1

    def test_type_coercion_names_row_and_column(self):
        bad = env_line().replace("25.0", "warm", 1)
        env = [dict(zip(ENV_HEADER_LINE.split(","), bad.split(",")))]
        econ = [dict(zip(ECON_HEADER_LINE.split(","), econ_line().split(",")))]
        with pytest.raises(TypeCoercion) as exc:
            merge_sources(env, econ)
        assert exc.value.column == "Temperature"

    def test_join_commutes_with_row_order(self, rng):
        env_rows, econ_rows = [], []
        crops = ["Wheat", "Gram", "Maize"]
        for year in (2011, 2012):
            for crop in crops:
                econ_rows.append(dict(zip(ECON_HEADER_LINE.split(","),
                                          econ_line(year=year, crop=crop, op=1000 + year).split(","))))
                for d in ("D1", "D2"):
                    env_rows.append(dict(zip(ENV_HEADER_LINE.split(","),
                                             env_line(year=year, crop=crop, district=d).split(","))))
        base = merge_sources(list(env_rows), list(econ_rows))
        perm = [env_rows[i] for i in rng.permutation(len(env_rows))]
        shuffled = merge_sources(perm, econ_rows[::-1])
        key = lambda r: (r.state, r.district, r.year, r.season, r.crop)
        assert sorted(key(r) for r in base.records) == sorted(key(r) for r in shuffled.records)


class TestDeriveYield:
    def test_simple_division(self):
        ds = toy_dataset([record(production=10.0, area=2.0)])
        assert ds.records[0].yield_ == 5.0

    def test_zero_production(self):
        ds = toy_dataset([record(production=0.0, area=5.0)])
        assert ds.records[0].yield_ == 0.0

    def test_zero_area_flagged_not_divided(self):
        ds = toy_dataset([record(production=7.0, area=0.0)])
        assert ds.records[0].yield_ is None
        assert any("zero-area" in w for w in ds.warnings)

    def test_yield_times_area_is_production(self, drift_dataset):
        for rec in drift_dataset.records:
            assert rec.yield_ * rec.area == pytest.approx(rec.production, rel=1e-9)


class TestCleanDataset:
    def test_missing_production_dropped_and_logged(self):
        recs = [record(district=f"D{i}") for i in range(98)]
        recs += [record(district="X1", production=None), record(district="X2", production=None)]
        ds = toy_dataset(recs)
        ds, log = clean_dataset(ds, CleaningConfig(max_missing_fraction=0.05))
        assert len(ds) == 98
        drop = [a for a in log if a.rule is CleaningRule.DROP_MISSING_PRODUCTION]
        assert len(drop) == 1 and drop[0].rows_affected == 2

    def test_too_much_missing(self):
        recs = [record(district=f"D{i}") for i in range(10)]
        recs += [record(district="X1", production=None)]
        ds = toy_dataset(recs)
        with pytest.raises(TooMuchMissing):
            clean_dataset(ds, CleaningConfig(max_missing_fraction=0.05))

    def test_keep_years_removes_2015(self):
        recs = [record(year=y, district=f"D{y}") for y in (2011, 2012, 2013, 2014, 2015)]
        ds = toy_dataset(recs)
        ds, log = clean_dataset(ds)
        assert sorted({r.year for r in ds.records}) == [2011, 2012, 2013, 2014]
        drop = [a for a in log if a.rule is CleaningRule.DROP_YEAR]
        assert drop[0].rows_affected == 1

    def test_yield_outlier_removed_with_k10(self):
        # yields {1,1,1,1,1000}: Q3 = 1, IQR = 0, fence = 1 -> 1000 removed
        recs = [record(district=f"D{i}", production=1.0, area=1.0) for i in range(4)]
        recs.append(record(district="D9", production=1000.0, area=1.0))
        ds = toy_dataset(recs)
        ds, log = clean_dataset(ds)
        assert len(ds) == 4
        out = [a for a in log if a.rule is CleaningRule.YIELD_OUTLIER_REMOVAL]
        assert out[0].rows_affected == 1

    def test_row_count_ledger(self):
        recs = [record(district=f"D{i}") for i in range(50)]
        recs += [record(district="X", production=None), record(year=2015, district="Y")]
        ds = toy_dataset(recs)
        n0 = len(ds)
        ds, log = clean_dataset(ds)
        removal_rules = (CleaningRule.DROP_MISSING_PRODUCTION, CleaningRule.DROP_YEAR,
                         CleaningRule.YIELD_OUTLIER_REMOVAL)
        removed = sum(a.rows_affected for a in log if a.rule in removal_rules)
        assert len(ds) == n0 - removed

    def test_idempotent_on_representative_data(self, drift_dataset):
        ds = drift_dataset.take(range(len(drift_dataset)))
        once, _ = clean_dataset(ds)
        rows_once = [(r.state, r.district, r.year, r.season, r.crop, r.area) for r in once.records]
        twice, _ = clean_dataset(once)
        rows_twice = [(r.state, r.district, r.year, r.season, r.crop, r.area) for r in twice.records]
        assert rows_once == rows_twice

    def test_duplicates_logged_not_removed(self):
        recs = [record(), record()]  # identical key
        recs += [record(district=f"D{i}") for i in range(10, 14)]
        ds = toy_dataset(recs)
        ds, log = clean_dataset(ds)
        dup = [a for a in log if a.rule is CleaningRule.DUPLICATE_CHECK]
        assert dup[0].rows_affected == 1
        assert len(ds) == 6


class TestSummarize:
    def test_odd_symmetric_column(self):
        recs = [record(district=f"D{i}", msp=float(v)) for i, v in enumerate([1, 2, 3, 4, 5])]
        summary = {s.column: s for s in summarize_columns(toy_dataset(recs))}
        s = summary["MSP"]
        assert (s.q1, s.median, s.q3) == (2.0, 3.0, 4.0)

    def test_constant_column(self):
        recs = [record(district=f"D{i}", msp=5.0) for i in range(3)]
        s = {c.column: c for c in summarize_columns(toy_dataset(recs))}["MSP"]
        assert s.std == 0.0 and s.minimum == s.maximum == 5.0

    def test_linear_interpolation_quartiles(self):
        recs = [record(district=f"D{i}", msp=float(v)) for i, v in enumerate([1, 2, 3, 4])]
        s = {c.column: c for c in summarize_columns(toy_dataset(recs))}["MSP"]
        assert s.q1 == pytest.approx(1.75, abs=1e-12)
        assert s.q3 == pytest.approx(3.25, abs=1e-12)

    def test_empty_dataset(self):
        from agrorec.dataset import Dataset

        with pytest.raises(EmptyDataset):
            summarize_columns(Dataset(records=[]))


class TestRoundTrip:
    def test_csv_round_trip(self, tmp_path, drift_dataset):
        path = tmp_path / "cleaned.csv"
        write_cleaned_csv(drift_dataset, path)
        back = read_cleaned_csv(path)
        assert len(back) == len(drift_dataset)
        for a, b in zip(drift_dataset.records, back.records):
            assert a == b

    def test_ingest_files_pipeline(self, tmp_path):
        env = write_env(tmp_path / "env.csv", [
            env_line(district=f"D{i}") for i in range(6)
        ] + [env_line(state="Chattisgarh", crop="Bajar", district="D9")])
        econ = write_econ(tmp_path / "econ.csv", [
            econ_line(),
            econ_line(state="Chhattisgarh", crop="Bajra"),
        ])
        ds = ingest_files(env, econ)
        assert len(ds) == 7
        assert ds.cleaning_log[0].rule is CleaningRule.KEY_NORMALIZATION
        assert ds.cleaning_log[0].rows_affected == 2
        crops = {r.crop for r in ds.records}
        assert "Bajra" in crops
