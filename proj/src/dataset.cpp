#include "bcfp/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <unordered_map>

namespace bcfp {

CsvTable read_csv(std::istream& in) {
    CsvTable table;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    bool any = false;

    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        end_field();
        const bool blank = row.size() == 1 && row[0].empty();
        if (!blank) {
            if (table.header.empty()) {
                table.header = std::move(row);
            } else {
                table.rows.push_back(std::move(row));
            }
        }
        row.clear();
    };

    char c;
    while (in.get(c)) {
        any = true;
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                if (field_started && !field.empty()) {
                    throw DataError("malformed CSV: quote inside unquoted field");
                }
                in_quotes = true;
                field_started = true;
                break;
            case ',': end_field(); break;
            case '\r':
                if (in.peek() == '\n') {
                    in.get(c);
                }
                end_row();
                break;
            case '\n': end_row(); break;
            default:
                field.push_back(c);
                field_started = true;
        }
    }
    if (in_quotes) {
        throw DataError("malformed CSV: unterminated quoted field");
    }
    if (any && (field_started || !row.empty())) {
        end_row();
    }
    for (auto& h : table.header) {
        // Tolerate a UTF-8 byte-order mark and stray padding in the header.
        if (h.starts_with("\xEF\xBB\xBF")) {
            h.erase(0, 3);
        }
        while (!h.empty() && (h.back() == ' ' || h.back() == '\t')) {
            h.pop_back();
        }
        while (!h.empty() && (h.front() == ' ' || h.front() == '\t')) {
            h.erase(0, 1);
        }
    }
    return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    return read_csv(in);
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) {
        return field;
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') {
            out += "\"\"";
        } else {
            out.push_back(c);
        }
    }
    out.push_back('"');
    return out;
}

namespace {

std::size_t column_index(const CsvTable& table, const std::string& name) {
    const auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) {
        throw DataError("missing column '" + name + "'");
    }
    return static_cast<std::size_t>(it - table.header.begin());
}

std::optional<int> parse_label(std::string text) {
    text.erase(0, text.find_first_not_of(" \t"));
    text.erase(text.find_last_not_of(" \t") + 1);
    if (text == "1" || text == "1.0" || text == "True" || text == "true" || text == "BBB+") {
        return 1;
    }
    if (text == "0" || text == "0.0" || text == "False" || text == "false" || text == "BBB-") {
        return 0;
    }
    return std::nullopt;
}

}  // namespace

LoadedRecords extract_records(const CsvTable& table, const std::string& smiles_col, const std::string& label_col) {
    if (table.header.empty()) {
        throw DataError("empty CSV");
    }
    const std::size_t si = column_index(table, smiles_col);
    const std::size_t li = column_index(table, label_col);
    if (table.rows.empty()) {
        throw DataError("CSV has a header but no data rows");
    }
    LoadedRecords out;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        if (row.size() <= std::max(si, li)) {
            out.rejected.push_back({r, "short_row"});
            continue;
        }
        const auto label = parse_label(row[li]);
        if (!label) {
            out.rejected.push_back({r, "invalid_label"});
            continue;
        }
        out.records.push_back({row[si], *label, r});
    }
    return out;
}

CleanResult clean_dataset(const std::vector<DatasetRecord>& records, const ParseOptions& options) {
    CleanResult result;
    result.report.input = records.size();
    std::unordered_map<std::uint64_t, std::size_t> first_by_hash;  // hash -> index in result.records

    for (const auto& rec : records) {
        std::uint64_t key = 0;
        try {
            key = canonical_hash(parse_smiles(rec.smiles, options));
        } catch (const SmilesError& e) {
            ++result.report.invalid;
            result.report.dropped.push_back({rec.row_id, "invalid_smiles:" + std::string(to_string(e.kind()))});
            continue;
        }
        const auto [it, inserted] = first_by_hash.emplace(key, result.records.size());
        if (inserted) {
            result.records.push_back(rec);
            continue;
        }
        ++result.report.duplicates;
        const DatasetRecord& kept = result.records[it->second];
        if (kept.label != rec.label) {
            ++result.report.label_conflicts;
            result.report.dropped.push_back({rec.row_id, "duplicate_label_conflict:" + std::to_string(kept.row_id)});
        } else {
            result.report.dropped.push_back({rec.row_id, "duplicate_of:" + std::to_string(kept.row_id)});
        }
    }
    if (result.records.empty()) {
        throw DataError("EmptyDataset: no records survived cleanup");
    }
    return result;
}

void write_clean_csv(std::ostream& out, const std::vector<DatasetRecord>& records) {
    out << "smiles,label\n";
    for (const auto& r : records) {
        out << csv_escape(r.smiles) << ',' << r.label << '\n';
    }
}

void write_report_csv(std::ostream& out, const std::vector<DroppedRow>& dropped) {
    out << "row_id,reason\n";
    for (const auto& d : dropped) {
        out << d.row_id << ',' << csv_escape(d.reason) << '\n';
    }
}

std::vector<int> Dataset::labels() const {
    std::vector<int> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        out.push_back(r.label);
    }
    return out;
}

Dataset load_dataset(const std::filesystem::path& path, const std::string& smiles_col, const std::string& label_col,
                     const ParseOptions& options) {
    const auto loaded = extract_records(read_csv(path), smiles_col, label_col);
    if (!loaded.rejected.empty()) {
        throw DataError("row " + std::to_string(loaded.rejected.front().row_id) + ": " + loaded.rejected.front().reason);
    }
    Dataset ds;
    ds.records = loaded.records;
    ds.molecules.reserve(ds.records.size());
    for (const auto& rec : ds.records) {
        try {
            ds.molecules.push_back(parse_smiles(rec.smiles, options));
        } catch (const SmilesError& e) {
            throw DataError("row " + std::to_string(rec.row_id) + ": " + e.what());
        }
    }
    return ds;
}

}  // namespace bcfp
