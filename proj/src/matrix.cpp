#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "w3sim/atam.hpp"

namespace w3sim {

namespace {

bool offloads(const ArchitectureType& a) { return a.compute == Compute::B2 || a.storage != StorageKind::C1; }

// Sign of the relative change, zero inside the dead-band.
int sign_with_band(double value, double base, double eps) {
    if (base == 0.0) return (value > 0) - (value < 0);
    double rel = (value - base) / std::abs(base);
    if (rel > eps) return 1;
    if (rel < -eps) return -1;
    return 0;
}

int sgn(int x) { return (x > 0) - (x < 0); }

constexpr std::array<Column, kColumns> kAllColumns{
    Column::Performance,     Column::Scalability,  Column::Gas,       Column::Security,
    Column::Anonymity,       Column::Confidentiality, Column::Availability, Column::Usability,
    Column::User,            Column::Provider,     Column::Maintainer,
};

std::size_t idx(Column c) { return static_cast<std::size_t>(c); }

bool measured_cell(Column c) { return c == Column::Performance || c == Column::Scalability; }
bool has_trend(Column c) { return c == Column::Gas || c == Column::Availability; }

}  // namespace

std::string_view to_string(Column c) {
    switch (c) {
        case Column::Performance: return "Performance";
        case Column::Scalability: return "Scalability";
        case Column::Gas: return "Gas";
        case Column::Security: return "Security";
        case Column::Anonymity: return "Anonymity";
        case Column::Confidentiality: return "Confidentiality";
        case Column::Availability: return "Availability";
        case Column::Usability: return "Usability";
        case Column::User: return "User";
        case Column::Provider: return "Provider";
        case Column::Maintainer: return "Maintainer";
    }
    return "Unknown";
}

RuleScores rule_scores(const ArchitectureType& a) {
    RuleScores r;
    const bool off_storage = a.storage != StorageKind::C1;
    r.security = -(off_storage ? 1 : 0) - (a.compute == Compute::B2 ? 2 : 0);
    r.anonymity = a.access == Access::A2 ? -3 : 0;
    r.confidentiality = offloads(a) ? 2 : 0;
    r.availability = offloads(a) ? -2 : 0;
    r.usability = a.modified_components();
    r.gas = a.modified_components();
    return r;
}

Stakeholders stakeholder_benefits(const ArchitectureType& a) {
    int m = a.modified_components();
    return {m, -m, -m};
}

const MatrixRow* OrdinalMatrix::row_for(int type_id) const {
    for (const auto& r : rows)
        for (int t : r.type_ids)
            if (t == type_id) return &r;
    return nullptr;
}

OrdinalMatrix expected_table() {
    // Perf, Scal, Gas, Sec, Anon, Conf, Avail, Usab | User, Provider, Maintainer
    auto row = [](std::string label, std::vector<int> ids, std::array<int, kColumns> cells) {
        MatrixRow r;
        r.label = std::move(label);
        r.type_ids = std::move(ids);
        r.cells = cells;
        return r;
    };
    OrdinalMatrix m;
    m.rows = {
        row("1", {1}, {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0}),
        row("2/3", {2, 3}, {2, 2, 1, -1, 0, 2, -2, 1, 1, -1, -1}),
        row("4", {4}, {1, 1, 1, -2, 0, 2, -2, 1, 1, -1, -1}),
        row("5/6", {5, 6}, {2, 2, 2, -3, 0, 2, -2, 2, 2, -2, -2}),
        row("7", {7}, {1, 1, 1, 0, -3, 0, 0, 1, 1, -1, -1}),
        row("8/9", {8, 9}, {2, 2, 2, -1, -3, 2, -2, 2, 2, -2, -2}),
        row("10", {10}, {2, 2, 2, -2, -3, 2, -2, 2, 2, -2, -2}),
        row("11/12", {11, 12}, {3, 3, 3, -3, -3, 2, -2, 3, 3, -3, -3}),
    };
    return m;
}

OrdinalMatrix compare(const std::vector<MetricReport>& reports, const MetricReport& base, double eps) {
    OrdinalMatrix m;
    for (const auto& r : reports) {
        MatrixRow row;
        row.label = std::to_string(r.arch.type_id);
        row.type_ids = {r.arch.type_id};
        row.cells[idx(Column::Performance)] = sign_with_band(r.tps, base.tps, eps);
        row.cells[idx(Column::Scalability)] = sign_with_band(r.tps_at_scale, base.tps_at_scale, eps);
        row.cells[idx(Column::Gas)] = r.rules.gas;
        // Lower gas is the enhancement.
        row.trend[idx(Column::Gas)] = -sign_with_band(static_cast<double>(r.gas_total),
                                                      static_cast<double>(base.gas_total), eps);
        row.cells[idx(Column::Security)] = r.rules.security;
        row.cells[idx(Column::Anonymity)] = r.rules.anonymity;
        row.cells[idx(Column::Confidentiality)] = r.rules.confidentiality;
        row.cells[idx(Column::Availability)] = r.rules.availability;
        row.trend[idx(Column::Availability)] = sign_with_band(r.availability, base.availability, eps);
        row.cells[idx(Column::Usability)] = r.rules.usability;
        row.cells[idx(Column::User)] = r.stakeholders.user;
        row.cells[idx(Column::Provider)] = r.stakeholders.provider;
        row.cells[idx(Column::Maintainer)] = r.stakeholders.maintainer;
        m.rows.push_back(std::move(row));
    }
    return m;
}

std::vector<Mismatch> check_against_reference(const OrdinalMatrix& measured) {
    const auto expected = expected_table();
    std::vector<Mismatch> out;
    for (const auto& row : measured.rows) {
        for (int t : row.type_ids) {
            const auto* exp = expected.row_for(t);
            if (!exp) continue;
            for (auto c : kAllColumns) {
                const int want = exp->cells[idx(c)];
                if (measured_cell(c)) {
                    if (sgn(row.cells[idx(c)]) != sgn(want)) out.push_back({t, c, "sign", sgn(want), row.cells[idx(c)]});
                    continue;
                }
                if (row.cells[idx(c)] != want) out.push_back({t, c, "exact", want, row.cells[idx(c)]});
                if (has_trend(c) && row.trend[idx(c)] && *row.trend[idx(c)] != sgn(want))
                    out.push_back({t, c, "sign", sgn(want), *row.trend[idx(c)]});
            }
        }
    }
    return out;
}

std::string to_string(const Mismatch& m) {
    std::ostringstream s;
    s << "Type" << m.type_id << " " << to_string(m.column) << " (" << m.kind << "): expected " << m.expected
      << ", measured " << m.measured;
    return s.str();
}

namespace {

std::string glyph(int v) {
    if (v == 0) return "0";
    return std::string(static_cast<std::size_t>(std::abs(v)), v > 0 ? '+' : '-');
}

std::string sign_glyph(int v) { return v > 0 ? "↑" : v < 0 ? "↓" : "="; }

}  // namespace

std::string render_markdown(const OrdinalMatrix& m, const std::vector<Mismatch>& mismatches) {
    std::ostringstream out;
    out << "| Type | Tuple |";
    for (auto c : kAllColumns) out << " " << to_string(c) << " |";
    out << "\n|---|---|";
    for (std::size_t i = 0; i < kColumns; ++i) out << "---|";
    out << "\n";

    // Merge rows into the reference grouping; a group shows one value when its types agree.
    const auto groups = expected_table();
    for (const auto& g : groups.rows) {
        std::vector<const MatrixRow*> members;
        for (int t : g.type_ids)
            for (const auto& r : m.rows)
                if (std::find(r.type_ids.begin(), r.type_ids.end(), t) != r.type_ids.end()) {
                    members.push_back(&r);
                    break;
                }
        if (members.empty()) continue;
        out << "| " << g.label << " | ";
        for (std::size_t i = 0; i < g.type_ids.size(); ++i)
            out << (i ? " " : "") << type_from_id(g.type_ids[i]).tuple_string();
        out << " |";
        for (auto c : kAllColumns) {
            std::set<std::string> shown;
            for (const auto* r : members) {
                std::string cell = measured_cell(c) ? sign_glyph(r->cells[idx(c)]) : glyph(r->cells[idx(c)]);
                if (has_trend(c) && r->trend[idx(c)]) cell += " " + sign_glyph(*r->trend[idx(c)]);
                shown.insert(cell);
            }
            std::string joined;
            for (const auto& s : shown) joined += (joined.empty() ? "" : " / ") + s;
            out << " " << joined << " |";
        }
        out << "\n";
    }
    out << "\nCells: rule-scored ordinals (+ enhance, - decrease); arrows: measured sign against Type1.\n";
    if (mismatches.empty()) {
        out << "\nAll cells agree with the reference table.\n";
    } else {
        out << "\nMismatches:\n";
        for (const auto& mm : mismatches) out << "- " << to_string(mm) << "\n";
    }
    return out.str();
}

}  // namespace w3sim
