#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "fairrank/csv.hpp"
#include "fairrank/dataset.hpp"

using namespace fairrank;

namespace {

Dataset tiny_dataset(std::vector<double> x, Direction direction = Direction::Up) {
    LegitimateColumn col{"x", direction, std::move(x)};
    ProtectedColumn attr{"a", ProtectedKind::Numeric, std::vector<double>(col.values.size(), 0.0), {}};
    return Dataset::make({}, {attr}, {col}, std::nullopt);
}

}  // namespace

TEST_CASE("fit_scaling records extrema") {
    const auto spec = fit_scaling(tiny_dataset({130, 150, 170}));
    CHECK(spec.features[0].min == 130.0);
    CHECK(spec.features[0].max == 170.0);
    CHECK_FALSE(spec.features[0].degenerate);
}

TEST_CASE("fit_scaling flags constant columns") {
    const auto spec = fit_scaling(tiny_dataset({5, 5, 5}));
    CHECK(spec.features[0].degenerate);
}

TEST_CASE("fit_scaling rejects empty input") {
    CHECK_THROWS(fit_scaling(tiny_dataset({})));
}

TEST_CASE("apply_scaling maps extrema and clamps unseen values") {
    ScalingSpec spec;
    spec.features.push_back({"x", 130.0, 170.0, Direction::Up, false});

    CHECK(apply_scaling(spec, {{130.0}}).at(0, 0) == 0.0);
    CHECK(apply_scaling(spec, {{170.0}}).at(0, 0) == 1.0);
    CHECK(apply_scaling(spec, {{150.0}}).at(0, 0) == doctest::Approx(0.5));

    // out-of-range unseen values are capped
    ScalingSpec wide;
    wide.features.push_back({"x", 0.0, 1000.0, Direction::Up, false});
    CHECK(apply_scaling(wide, {{2000.0}}).at(0, 0) == 1.0);
    CHECK(apply_scaling(wide, {{-50.0}}).at(0, 0) == 0.0);
}

TEST_CASE("apply_scaling reverses Down features") {
    ScalingSpec spec;
    spec.features.push_back({"x", 0.0, 1.0, Direction::Down, false});
    CHECK(apply_scaling(spec, {{0.25}}).at(0, 0) == 0.75);
    CHECK(apply_scaling(spec, {{0.0}}).at(0, 0) == 1.0);
    CHECK(apply_scaling(spec, {{1.0}}).at(0, 0) == 0.0);
}

TEST_CASE("degenerate features scale to zero regardless of direction") {
    ScalingSpec spec;
    spec.features.push_back({"x", 5.0, 5.0, Direction::Down, true});
    CHECK(apply_scaling(spec, {{5.0}}).at(0, 0) == 0.0);
    CHECK(apply_scaling(spec, {{7.0}}).at(0, 0) == 0.0);
}

TEST_CASE("apply_scaling rejects rows of the wrong width") {
    ScalingSpec spec;
    spec.features.push_back({"x", 0.0, 1.0, Direction::Up, false});
    CHECK_THROWS(apply_scaling(spec, {{0.5, 0.5}}));
}

TEST_CASE("scaling is monotone on fit data") {
    const std::vector<double> raw{3.0, 1.0, 7.0, 4.0, 4.0, 9.5, 0.5};
    const Dataset up = tiny_dataset(raw, Direction::Up);
    const auto z_up = apply_scaling(fit_scaling(up), up);
    const Dataset down = tiny_dataset(raw, Direction::Down);
    const auto z_down = apply_scaling(fit_scaling(down), down);
    for (std::size_t i = 0; i < raw.size(); ++i) {
        for (std::size_t j = 0; j < raw.size(); ++j) {
            if (raw[i] < raw[j]) {
                CHECK(z_up.at(i, 0) <= z_up.at(j, 0));
                CHECK(z_down.at(i, 0) >= z_down.at(j, 0));
            }
        }
    }
}

TEST_CASE("schema parsing round-trips and validates") {
    std::istringstream text(
        "# admissions schema\n"
        "id id\n"
        "gender protected categorical\n"
        "GRE_V legitimate up\n"
        "amount legitimate down\n"
        "Y label positive=good negative=bad\n"
        "notes ignore\n");
    const SchemaAnnotation schema = parse_schema(text, "test");
    CHECK(schema.entries.size() == 6);
    CHECK(schema.entries[3].direction == Direction::Down);
    CHECK(schema.entries[4].positive_code == "good");

    std::ostringstream out;
    write_schema(out, schema);
    std::istringstream again(out.str());
    const SchemaAnnotation parsed = parse_schema(again, "round-trip");
    CHECK(parsed.entries.size() == schema.entries.size());
}

TEST_CASE("schema rejects a legitimate feature without direction") {
    std::istringstream text("GRE_Q legitimate\n");
    CHECK_THROWS(parse_schema(text, "test"));
}

TEST_CASE("load_csv builds a typed dataset from the admissions format") {
    std::istringstream csv(
        "id,gender,GRE_V,GRE_Q,GRE_AW,Y\n"
        "1,male,147,144,3.0,+\n"
        "2,male,146,140,3.5,+\n"
        "11,female,153,147,3.5,-\n");
    std::istringstream schema_text(
        "id id\n"
        "gender protected categorical\n"
        "GRE_V legitimate up\n"
        "GRE_Q legitimate up\n"
        "GRE_AW legitimate up\n"
        "Y label\n");
    const Dataset d = dataset_from_csv(read_csv(csv, "test.csv"), parse_schema(schema_text, "s"));
    CHECK(d.n_rows() == 3);
    CHECK(d.n_protected() == 1);
    CHECK(d.n_legitimate() == 3);
    CHECK(d.labels()[2] == Label::Negative);
    CHECK(d.protected_column("gender").categories.size() == 2);
    CHECK(d.id_of(2) == "11");
}

TEST_CASE("load_csv rejects schema/header mismatches") {
    std::istringstream schema_text(
        "x legitimate up\n"
        "Y label\n");
    const SchemaAnnotation schema = parse_schema(schema_text, "s");

    std::istringstream missing("x\n1.0\n");
    CHECK_THROWS(dataset_from_csv(read_csv(missing, "t"), schema));

    std::istringstream extra("x,Y,stray\n1.0,+,z\n");
    CHECK_THROWS(dataset_from_csv(read_csv(extra, "t"), schema));

    std::istringstream bad_cell("x,Y\nnot-a-number,+\n");
    CHECK_THROWS(dataset_from_csv(read_csv(bad_cell, "t"), schema));

    std::istringstream empty("");
    CHECK_THROWS(read_csv(empty, "t"));
}

TEST_CASE("german credit fixture maps roles, directions and encodings") {
    // 21-field rows in the raw UCI layout
    std::istringstream mapping_text(
        "protected   9  personal_status_gender categorical\n"
        "protected  13  age                    numeric\n"
        "protected  20  foreign_worker         binary A201=1 A202=0\n"
        "legitimate  1  checking_account_status up   A11=0 A14=1 A12=2 A13=3\n"
        "legitimate  6  savings_status          up   A65=0 A61=1 A62=2 A63=3 A64=4\n"
        "legitimate 12  property                up   A124=0 A123=1 A122=2 A121=3\n"
        "legitimate 15  housing                 up   A153=0 A151=1 A152=2\n"
        "legitimate  3  credit_history          up   A34=0 A33=1 A32=2 A31=3 A30=4\n"
        "legitimate  5  credit_amount           down\n"
        "legitimate 17  job                     up   A171=0 A172=1 A173=2 A174=3\n"
        "legitimate  7  employment_since        up   A71=0 A72=1 A73=2 A74=3 A75=4\n"
        "label      21  Y positive=1 negative=2\n");
    const GermanCreditMapping mapping = parse_german_credit_mapping(mapping_text, "m");
    CHECK(mapping.columns.size() == 11);

    const std::string row1 =
        "A11 6 A34 A43 1169 A65 A75 4 A93 A101 4 A121 67 A143 A152 2 A173 1 A192 A201 1";
    const std::string row2 =
        "A12 48 A32 A43 5951 A61 A73 2 A92 A101 2 A121 22 A143 A152 1 A173 1 A191 A201 2";
    const std::string path = "/tmp/fairrank_german_fixture.txt";
    {
        std::ofstream out(path);
        out << row1 << "\n" << row2 << "\n";
    }
    const Dataset d = load_german_credit(path, mapping);
    CHECK(d.n_rows() == 2);
    CHECK(d.n_protected() == 3);
    CHECK(d.n_legitimate() == 8);
    CHECK(d.labels()[0] == Label::Positive);
    CHECK(d.labels()[1] == Label::Negative);

    // credit amount stays raw and is declared Down
    bool found_amount = false;
    for (const auto& col : d.legitimate_columns()) {
        if (col.name == "credit_amount") {
            found_amount = true;
            CHECK(col.direction == Direction::Down);
            CHECK(col.values[0] == 1169.0);
        }
        if (col.name == "checking_account_status") {
            CHECK(col.values[0] == 0.0);  // A11
            CHECK(col.values[1] == 2.0);  // A12
        }
    }
    CHECK(found_amount);

    // unmapped code in the data is an error
    {
        std::ofstream out(path);
        out << "A99 6 A34 A43 1169 A65 A75 4 A93 A101 4 A121 67 A143 A152 2 A173 1 A192 A201 1\n";
    }
    CHECK_THROWS(load_german_credit(path, mapping));
}

TEST_CASE("train_test_split is deterministic, disjoint and covering") {
    std::vector<double> x(100);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i);
    const Dataset d = tiny_dataset(x);

    const auto [train_a, test_a] = train_test_split(d, 20, 7);
    const auto [train_b, test_b] = train_test_split(d, 20, 7);
    CHECK(train_a.n_rows() == 80);
    CHECK(test_a.n_rows() == 20);

    const auto values = [](const Dataset& ds) {
        return ds.legitimate_columns()[0].values;
    };
    CHECK(values(train_a) == values(train_b));
    CHECK(values(test_a) == values(test_b));

    std::set<double> all;
    for (const double v : values(train_a)) all.insert(v);
    for (const double v : values(test_a)) all.insert(v);
    CHECK(all.size() == 100);

    const auto [train_c, test_c] = train_test_split(d, 20, 8);
    CHECK(values(test_a) != values(test_c));
}

TEST_CASE("train_test_split edge cases") {
    const Dataset d = tiny_dataset({1, 2, 3});
    const auto [train, test] = train_test_split(d, 0, 1);
    CHECK(train.n_rows() == 3);
    CHECK(test.n_rows() == 0);
    CHECK_THROWS(train_test_split(d, 3, 1));
    CHECK_THROWS(train_test_split(d, 10, 1));
}

TEST_CASE("dataset CSV export is stable") {
    std::istringstream csv(
        "id,gender,GRE_V,Y\n"
        "1,male,147,+\n"
        "2,female,153,-\n");
    std::istringstream schema_text(
        "id id\n"
        "gender protected categorical\n"
        "GRE_V legitimate up\n"
        "Y label\n");
    const Dataset d = dataset_from_csv(read_csv(csv, "t"), parse_schema(schema_text, "s"));
    std::ostringstream out;
    write_dataset_csv(out, d);
    CHECK(out.str() == "id,gender,GRE_V,Y\n1,male,147,+\n2,female,153,-\n");
}
