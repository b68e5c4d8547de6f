#include "uclock/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace uclock {

double ctvr(std::int64_t clauses, std::int64_t vars)
{
    if (vars < 1)
        throw InputError("ctvr: variable count must be >= 1");
    return static_cast<double>(clauses) / static_cast<double>(vars);
}

double cgf(std::int64_t clauses_obf, std::int64_t clauses_base)
{
    if (clauses_base < 1)
        throw InputError("cgf: baseline clause count must be >= 1");
    return static_cast<double>(clauses_obf) / static_cast<double>(clauses_base);
}

double kcr(std::int64_t key_bits, std::int64_t vars)
{
    if (vars < 1)
        throw InputError("kcr: variable count must be >= 1");
    return static_cast<double>(key_bits) / static_cast<double>(vars);
}

double rr(std::int64_t clauses, std::int64_t vars)
{
    if (vars < 1)
        throw InputError("rr: variable count must be >= 1");
    return std::abs(static_cast<double>(clauses - vars)) / static_cast<double>(vars);
}

NormalizeResult minmax_normalize(const std::map<std::string, double>& group)
{
    if (group.empty())
        throw InputError("minmax_normalize: empty group");
    NormalizeResult res;
    double lo = group.begin()->second, hi = group.begin()->second;
    for (const auto& [_, v] : group) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi == lo) {
        res.degenerate = true;
        for (const auto& [k, _] : group)
            res.values[k] = 0.0;
        return res;
    }
    for (const auto& [k, v] : group)
        res.values[k] = (v - lo) / (hi - lo);
    return res;
}

MetricsReport compute_metrics(const std::vector<AttackRecord>& records,
                              const std::map<std::string, std::int64_t>& baseline_clauses)
{
    MetricsReport report;
    std::set<std::pair<std::string, std::string>> seen;

    for (const auto& rec : records) {
        if (!seen.emplace(rec.circuit, rec.attack).second)
            throw InputError("duplicate (circuit, attack) pair: " + rec.circuit + "/" +
                             rec.attack);
        MetricsRow row;
        row.circuit = rec.circuit;
        row.attack = rec.attack;
        row.V = rec.cnf_vars;
        row.C = rec.cnf_clauses;
        row.K = rec.key_size;
        row.time_s = rec.time_s;
        row.status = attack_status_name(rec.status);
        row.bits_matched = rec.bits_matched;
        row.ctvr = ctvr(rec.cnf_clauses, rec.cnf_vars);
        row.kcr = kcr(rec.key_size, rec.cnf_vars);
        row.kcr_permille = row.kcr * 1000.0;
        row.rr = rr(rec.cnf_clauses, rec.cnf_vars);
        row.cope_percent = rec.cope_percent;
        auto base = baseline_clauses.find(rec.circuit);
        if (base != baseline_clauses.end())
            row.cgf = cgf(rec.cnf_clauses, base->second);
        report.rows.push_back(std::move(row));
    }

    std::sort(report.rows.begin(), report.rows.end(), [](const auto& a, const auto& b) {
        return std::tie(a.circuit, a.attack) < std::tie(b.circuit, b.attack);
    });

    // ctvr_norm: per attack, across circuits.
    std::map<std::string, std::map<std::string, double>> by_attack;
    for (const auto& row : report.rows)
        by_attack[row.attack][row.circuit] = row.ctvr;
    std::map<std::string, NormalizeResult> attack_norms;
    for (const auto& [attack, group] : by_attack) {
        attack_norms[attack] = minmax_normalize(group);
        if (attack_norms[attack].degenerate)
            report.warnings.push_back("ctvr_norm: all CTVR values equal for attack " + attack +
                                      "; normalized to 0");
    }

    // drr_norm: per circuit, across attacks.
    std::map<std::string, std::map<std::string, double>> by_circuit;
    for (const auto& row : report.rows)
        by_circuit[row.circuit][row.attack] = row.rr;
    std::map<std::string, NormalizeResult> circuit_norms;
    for (const auto& [circuit, group] : by_circuit) {
        circuit_norms[circuit] = minmax_normalize(group);
        if (circuit_norms[circuit].degenerate)
            report.warnings.push_back("drr_norm: all RR values equal for circuit " + circuit +
                                      "; normalized to 0");
    }

    for (auto& row : report.rows) {
        row.ctvr_norm = attack_norms.at(row.attack).values.at(row.circuit);
        row.drr_norm = circuit_norms.at(row.circuit).values.at(row.attack);
    }
    return report;
}

namespace {

std::string format_ratio(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::string format_time(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::string csv_quote(const std::string& field)
{
    if (field.find_first_of(",\"\n\r") == std::string::npos)
        return field;
    std::string quoted = "\"";
    for (char c : field) {
        if (c == '"')
            quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

const char* kColumns[] = {"circuit", "attack", "V", "C", "K", "time_s", "status",
                          "bits_matched", "ctvr", "ctvr_norm", "cgf", "kcr",
                          "kcr_permille", "rr", "drr_norm", "cope_percent"};

std::vector<std::string> row_fields(const MetricsRow& row)
{
    auto opt_int = [](const std::optional<std::int64_t>& v) {
        return v ? std::to_string(*v) : std::string();
    };
    auto opt_ratio = [](const std::optional<double>& v) {
        return v ? format_ratio(*v) : std::string();
    };
    return {row.circuit,
            row.attack,
            std::to_string(row.V),
            std::to_string(row.C),
            std::to_string(row.K),
            format_time(row.time_s),
            row.status,
            opt_int(row.bits_matched),
            format_ratio(row.ctvr),
            opt_ratio(row.ctvr_norm),
            opt_ratio(row.cgf),
            format_ratio(row.kcr),
            format_ratio(row.kcr_permille),
            format_ratio(row.rr),
            opt_ratio(row.drr_norm),
            opt_ratio(row.cope_percent)};
}

} // namespace

void emit_report(const std::vector<MetricsRow>& rows, std::ostream& out, ReportFormat format)
{
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& row : rows)
        if (!seen.emplace(row.circuit, row.attack).second)
            throw InputError("duplicate (circuit, attack) pair: " + row.circuit + "/" +
                             row.attack);

    if (format == ReportFormat::Csv) {
        for (std::size_t c = 0; c < std::size(kColumns); ++c)
            out << (c ? "," : "") << kColumns[c];
        out << "\r\n";
        for (const auto& row : rows) {
            auto fields = row_fields(row);
            for (std::size_t c = 0; c < fields.size(); ++c)
                out << (c ? "," : "") << csv_quote(fields[c]);
            out << "\r\n";
        }
        return;
    }

    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
        nlohmann::ordered_json j;
        j["circuit"] = row.circuit;
        j["attack"] = row.attack;
        j["V"] = row.V;
        j["C"] = row.C;
        j["K"] = row.K;
        j["time_s"] = row.time_s;
        j["status"] = row.status;
        j["bits_matched"] = row.bits_matched ? nlohmann::ordered_json(*row.bits_matched)
                                             : nlohmann::ordered_json(nullptr);
        j["ctvr"] = row.ctvr;
        j["ctvr_norm"] = row.ctvr_norm ? nlohmann::ordered_json(*row.ctvr_norm)
                                       : nlohmann::ordered_json(nullptr);
        j["cgf"] = row.cgf ? nlohmann::ordered_json(*row.cgf) : nlohmann::ordered_json(nullptr);
        j["kcr"] = row.kcr;
        j["kcr_permille"] = row.kcr_permille;
        j["rr"] = row.rr;
        j["drr_norm"] = row.drr_norm ? nlohmann::ordered_json(*row.drr_norm)
                                     : nlohmann::ordered_json(nullptr);
        j["cope_percent"] = row.cope_percent ? nlohmann::ordered_json(*row.cope_percent)
                                             : nlohmann::ordered_json(nullptr);
        arr.push_back(std::move(j));
    }
    out << arr.dump(2) << "\n";
}

void write_report_file(const std::vector<MetricsRow>& rows, const std::string& path,
                       ReportFormat format)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw InputError("cannot write report file: " + path);
    emit_report(rows, out, format);
}

std::vector<MetricsRow> rows_from_json(std::istream& in)
{
    nlohmann::json arr;
    try {
        in >> arr;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("metrics json: ") + e.what());
    }
    if (!arr.is_array())
        throw InputError("metrics json: expected an array of rows");

    std::vector<MetricsRow> rows;
    for (const auto& j : arr) {
        MetricsRow row;
        row.circuit = j.at("circuit").get<std::string>();
        row.attack = j.at("attack").get<std::string>();
        row.V = j.at("V").get<std::int64_t>();
        row.C = j.at("C").get<std::int64_t>();
        row.K = j.at("K").get<std::int64_t>();
        row.time_s = j.at("time_s").get<double>();
        row.status = j.at("status").get<std::string>();
        auto opt_i = [&](const char* key) -> std::optional<std::int64_t> {
            if (!j.contains(key) || j[key].is_null())
                return std::nullopt;
            return j[key].get<std::int64_t>();
        };
        auto opt_d = [&](const char* key) -> std::optional<double> {
            if (!j.contains(key) || j[key].is_null())
                return std::nullopt;
            return j[key].get<double>();
        };
        row.bits_matched = opt_i("bits_matched");
        row.ctvr = j.at("ctvr").get<double>();
        row.ctvr_norm = opt_d("ctvr_norm");
        row.cgf = opt_d("cgf");
        row.kcr = j.at("kcr").get<double>();
        row.kcr_permille = j.at("kcr_permille").get<double>();
        row.rr = j.at("rr").get<double>();
        row.drr_norm = opt_d("drr_norm");
        row.cope_percent = opt_d("cope_percent");
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line, int line_no)
{
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    if (quoted)
        throw InputError("row " + std::to_string(line_no) + ": unterminated quote");
    fields.push_back(cur);
    return fields;
}

} // namespace

std::vector<AttackRecord> ingest_paper_table(std::istream& in)
{
    std::string line;
    int line_no = 0;
    std::vector<std::string> header;
    std::vector<AttackRecord> records;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#')
            continue;
        auto fields = split_csv_line(line, line_no);
        if (header.empty()) {
            header = fields;
            const std::vector<std::string> want = {"circuit", "attack", "V",         "C",
                                                   "K",       "time_h", "bits_found", "bits_total"};
            if (header != want)
                throw InputError("row " + std::to_string(line_no) +
                                 ": unexpected header for paper-table CSV");
            continue;
        }
        if (fields.size() != 8)
            throw InputError("row " + std::to_string(line_no) + ": expected 8 fields, got " +
                             std::to_string(fields.size()));
        AttackRecord rec;
        rec.circuit = fields[0];
        rec.attack = fields[1];
        try {
            rec.cnf_vars = std::stoll(fields[2]);
            rec.cnf_clauses = std::stoll(fields[3]);
            rec.key_size = std::stoll(fields[4]);
        } catch (const std::exception&) {
            throw InputError("row " + std::to_string(line_no) + ": bad integer field");
        }
        if (fields[5] == "TO" || fields[5].empty()) {
            rec.status = AttackStatus::Timeout;
        } else {
            rec.status = AttackStatus::Broken;
            try {
                rec.time_s = std::stod(fields[5]) * 3600.0;
            } catch (const std::exception&) {
                throw InputError("row " + std::to_string(line_no) + ": bad time_h field");
            }
        }
        if (!fields[6].empty()) {
            try {
                rec.bits_matched = std::stoll(fields[6]);
            } catch (const std::exception&) {
                throw InputError("row " + std::to_string(line_no) + ": bad bits_found field");
            }
            rec.status = AttackStatus::Guess;
        }
        records.push_back(std::move(rec));
    }
    if (header.empty())
        throw InputError("paper-table CSV is empty");
    return records;
}

std::vector<AttackRecord> ingest_paper_table_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open paper-table CSV: " + path);
    return ingest_paper_table(in);
}

} // namespace uclock
