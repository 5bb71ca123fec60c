#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcfp/molecule.hpp"
#include "bcfp/smiles.hpp"

namespace bcfp {

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DatasetRecord {
    std::string smiles;
    int label = 0;  // 0 or 1
    std::size_t row_id = 0;  // 0-based data row in the source file
};

struct DroppedRow {
    std::size_t row_id = 0;
    std::string reason;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// RFC 4180 style reader: quoted fields, doubled quotes, CRLF tolerated.
[[nodiscard]] CsvTable read_csv(std::istream& in);
[[nodiscard]] CsvTable read_csv(const std::filesystem::path& path);
[[nodiscard]] std::string csv_escape(const std::string& field);

struct LoadedRecords {
    std::vector<DatasetRecord> records;
    std::vector<DroppedRow> rejected;  // rows whose label could not be read
};

/// Extracts (smiles, label) columns. Throws DataError when a column is
/// missing or the table has no data rows.
[[nodiscard]] LoadedRecords extract_records(const CsvTable& table, const std::string& smiles_col,
                                            const std::string& label_col);

struct CleanReport {
    std::size_t input = 0;
    std::size_t invalid = 0;
    std::size_t duplicates = 0;
    std::size_t label_conflicts = 0;
    std::vector<DroppedRow> dropped;
};

struct CleanResult {
    std::vector<DatasetRecord> records;
    CleanReport report;
};

/// Drops rows that fail to parse, then keeps the first record of every
/// canonical_hash class. Throws DataError("EmptyDataset") when nothing
/// survives.
[[nodiscard]] CleanResult clean_dataset(const std::vector<DatasetRecord>& records,
                                        const ParseOptions& options = {});

void write_clean_csv(std::ostream& out, const std::vector<DatasetRecord>& records);
void write_report_csv(std::ostream& out, const std::vector<DroppedRow>& dropped);

/// Parsed, labelled molecules ready for featurization.
struct Dataset {
    std::vector<DatasetRecord> records;
    std::vector<Molecule> molecules;

    [[nodiscard]] std::size_t size() const noexcept { return records.size(); }
    [[nodiscard]] std::vector<int> labels() const;
};

/// Loads a CSV and parses every SMILES; throws DataError on the first
/// unparseable row.
[[nodiscard]] Dataset load_dataset(const std::filesystem::path& path, const std::string& smiles_col,
                                   const std::string& label_col, const ParseOptions& options = {});

}  // namespace bcfp
