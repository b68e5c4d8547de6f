// Attack-trace metrics over attack records: clause density (CTVR) with
// min-max normalization across circuits per attack, clause growth vs the
// unlocked baseline (CGF), key-to-variable pressure (KCR, also rendered
// per-mille), and the redundancy-ratio spread across attacks per circuit.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "uclock/attacks.hpp"

namespace uclock {

double ctvr(std::int64_t clauses, std::int64_t vars);
double cgf(std::int64_t clauses_obf, std::int64_t clauses_base);
double kcr(std::int64_t key_bits, std::int64_t vars);
double rr(std::int64_t clauses, std::int64_t vars);

struct NormalizeResult {
    std::map<std::string, double> values;
    bool degenerate = false; // all inputs equal; everything mapped to 0
};

// (x - min) / (max - min) over the group; a single-valued group maps to all
// zeros with the degenerate flag raised.
NormalizeResult minmax_normalize(const std::map<std::string, double>& group);

struct MetricsRow {
    std::string circuit;
    std::string attack;
    std::int64_t V = 0;
    std::int64_t C = 0;
    std::int64_t K = 0;
    double time_s = 0.0;
    std::string status;
    std::optional<std::int64_t> bits_matched;
    double ctvr = 0.0;
    std::optional<double> ctvr_norm;
    std::optional<double> cgf; // needs the clause count of the unlocked circuit
    double kcr = 0.0;
    double kcr_permille = 0.0;
    double rr = 0.0;
    std::optional<double> drr_norm;
    std::optional<double> cope_percent;
};

struct MetricsReport {
    std::vector<MetricsRow> rows; // sorted by (circuit, attack)
    std::vector<std::string> warnings;
};

// Per-row ratios plus the two grouped normalizations: ctvr_norm groups rows
// by attack across circuits, drr_norm by circuit across attacks. Duplicate
// (circuit, attack) pairs are rejected.
MetricsReport compute_metrics(const std::vector<AttackRecord>& records,
                              const std::map<std::string, std::int64_t>& baseline_clauses = {});

enum class ReportFormat { Csv, Json };

// Column order is fixed: circuit, attack, V, C, K, time_s, status,
// bits_matched, ctvr, ctvr_norm, cgf, kcr, kcr_permille, rr, drr_norm,
// cope_percent. CSV fields are RFC-4180 quoted; JSON is an array of objects
// with exactly those keys (null for absent optionals).
void emit_report(const std::vector<MetricsRow>& rows, std::ostream& out, ReportFormat format);
void write_report_file(const std::vector<MetricsRow>& rows, const std::string& path,
                       ReportFormat format);

// Re-reads a JSON report; emit_report(rows_from_json(j), Csv) is byte-equal
// to the direct CSV path.
std::vector<MetricsRow> rows_from_json(std::istream& in);

// Transcribed-table ingestion: CSV with header
//   circuit,attack,V,C,K,time_h,bits_found,bits_total
// where time_h is a number for solved rows or TO for timeouts.
std::vector<AttackRecord> ingest_paper_table(std::istream& in);
std::vector<AttackRecord> ingest_paper_table_file(const std::string& path);

} // namespace uclock
