#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fairrank {

struct CsvTable;

enum class FeatureRole { Protected, Legitimate };

/// Declared monotonic relationship between a legitimate feature and the
/// positive outcome: Up means higher raw values are beneficial.
enum class Direction { Up, Down };

enum class Label { Positive, Negative };

enum class ProtectedKind { Numeric, Binary, Categorical };

std::string to_string(Direction d);
std::string to_string(Label l);
Direction direction_from_string(const std::string& text);

struct ProtectedColumn {
    std::string name;
    ProtectedKind kind = ProtectedKind::Numeric;
    std::vector<double> values;           // category index when kind == Categorical
    std::vector<std::string> categories;  // non-empty iff kind == Categorical
};

struct LegitimateColumn {
    std::string name;
    Direction direction = Direction::Up;
    std::vector<double> values;  // numeric or ordinal-encoded
};

/// Column-oriented dataset: K protected columns, L legitimate columns (each
/// with a direction), optional {+,-} labels and optional observation ids.
/// Immutable after construction; loaders enforce N >= 1 and L >= 1, while
/// train_test_split may legitimately produce an empty partition.
class Dataset {
public:
    static Dataset make(std::vector<std::string> ids,
                        std::vector<ProtectedColumn> protected_columns,
                        std::vector<LegitimateColumn> legitimate_columns,
                        std::optional<std::vector<Label>> labels);

    std::size_t n_rows() const { return n_rows_; }
    std::size_t n_protected() const { return protected_.size(); }
    std::size_t n_legitimate() const { return legitimate_.size(); }

    const std::vector<ProtectedColumn>& protected_columns() const { return protected_; }
    const std::vector<LegitimateColumn>& legitimate_columns() const { return legitimate_; }
    const ProtectedColumn& protected_column(const std::string& name) const;

    bool has_ids() const { return !ids_.empty(); }
    const std::vector<std::string>& ids() const { return ids_; }
    /// Row id, or the 1-based row number when no id column exists.
    std::string id_of(std::size_t row) const;

    bool has_labels() const { return labels_.has_value(); }
    const std::vector<Label>& labels() const;
    double positive_share() const;

    std::vector<double> legitimate_row(std::size_t row) const;
    std::vector<std::string> legitimate_names() const;

    Dataset subset(const std::vector<std::size_t>& rows) const;

private:
    std::size_t n_rows_ = 0;
    std::vector<std::string> ids_;
    std::vector<ProtectedColumn> protected_;
    std::vector<LegitimateColumn> legitimate_;
    std::optional<std::vector<Label>> labels_;
};

/// Per-feature min/max observed on the fit data plus the declared direction.
/// Degenerate features (max == min) are kept and flagged; they scale to 0.
struct FeatureScaling {
    std::string name;
    double min = 0.0;
    double max = 0.0;
    Direction direction = Direction::Up;
    bool degenerate = false;
};

struct ScalingSpec {
    std::vector<FeatureScaling> features;
    std::size_t size() const { return features.size(); }
};

/// Row-major N x L matrix of scaled features, all entries in [0, 1].
class ScaledMatrix {
public:
    ScaledMatrix() = default;
    ScaledMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double at(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
    double& at(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
    std::span<const double> row(std::size_t r) const {
        return std::span<const double>(values_.data() + r * cols_, cols_);
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

/// Records observed extrema of every legitimate feature. Throws on an empty
/// dataset. The spec is derived from fit data only; prediction-time rows
/// never update it.
ScalingSpec fit_scaling(const Dataset& dataset);

/// Min-max scale raw rows: z = (x - min)/(max - min), then z <- 1 - z for
/// Down features. Values from unseen observations are clamped to [0, 1];
/// degenerate features map to 0.
ScaledMatrix apply_scaling(const ScalingSpec& spec,
                           const std::vector<std::vector<double>>& raw_rows);
ScaledMatrix apply_scaling(const ScalingSpec& spec, const Dataset& dataset);

/// Schema annotation: feature name -> role (+ direction / kind / label codes).
/// Plain-text file, one entry per line:
///   gender  protected categorical
///   GRE_V   legitimate up
///   Y       label positive=+ negative=-
///   id      id
///   notes   ignore
struct SchemaEntry {
    std::string name;
    enum class Kind { Protected, Legitimate, LabelColumn, IdColumn, Ignore } kind;
    ProtectedKind protected_kind = ProtectedKind::Numeric;
    Direction direction = Direction::Up;
    std::string positive_code = "+";
    std::string negative_code = "-";
};

struct SchemaAnnotation {
    std::vector<SchemaEntry> entries;
};

SchemaAnnotation load_schema(const std::string& path);
SchemaAnnotation parse_schema(std::istream& in, const std::string& source_name);
void write_schema(std::ostream& out, const SchemaAnnotation& schema);

/// Load a CSV dataset against a schema annotation. Every schema entry must
/// match a CSV column and vice versa (use role `ignore` to drop a column).
Dataset load_csv_dataset(const std::string& csv_path, const SchemaAnnotation& schema);
Dataset dataset_from_csv(const CsvTable& table, const SchemaAnnotation& schema);

void write_dataset_csv(std::ostream& out, const Dataset& dataset);

/// Mapping config for the raw UCI German Credit file (whitespace-separated,
/// 21 fields, no header). Declares which columns are retained, their roles,
/// directions, and the ordinal encodings of categorical legitimate features.
struct GermanCreditMapping {
    struct Column {
        std::size_t index = 0;  // 1-based position in the raw file
        std::string name;
        FeatureRole role = FeatureRole::Legitimate;
        ProtectedKind protected_kind = ProtectedKind::Numeric;
        Direction direction = Direction::Up;
        std::vector<std::pair<std::string, double>> encoding;  // empty => numeric
    };
    std::vector<Column> columns;
    std::size_t label_index = 0;
    std::string positive_code = "1";
    std::string negative_code = "2";
};

GermanCreditMapping load_german_credit_mapping(const std::string& path);
GermanCreditMapping parse_german_credit_mapping(std::istream& in, const std::string& source_name);

Dataset load_german_credit(const std::string& data_path, const GermanCreditMapping& mapping);

/// Deterministic shuffle under seed, then split off `test_size` rows.
/// Partitions are disjoint and cover all rows; test_size >= N throws.
std::pair<Dataset, Dataset> train_test_split(const Dataset& dataset, std::size_t test_size,
                                             std::uint64_t seed);

}  // namespace fairrank
