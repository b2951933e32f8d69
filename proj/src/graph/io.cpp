#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "ignn/graph.hpp"

namespace ignn {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\n')) s.remove_suffix(1);
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        parts.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        const std::size_t j = i;
        while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        if (i > j) out.push_back(s.substr(j, i - j));
    }
    return out;
}

std::size_t parse_id(std::string_view tok, std::size_t line) {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size()) {
        throw ParseError("expected a node id, got '" + std::string(tok) + "'", line);
    }
    return v;
}

double parse_real(std::string_view tok, std::size_t line) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size() || !std::isfinite(v)) {
        throw ParseError("expected a finite number, got '" + std::string(tok) + "'", line);
    }
    return v;
}

struct EdgeRecord {
    std::size_t src;
    std::size_t dst;
    std::string relation;
};

std::vector<EdgeRecord> read_edges(std::istream& in, std::optional<std::size_t> n, bool relation_col) {
    std::vector<EdgeRecord> edges;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string_view text = trim(raw);
        if (text.empty()) continue;
        const auto cols = split(text, '\t');
        const std::size_t want = relation_col ? 3 : 2;
        if (cols.size() != want) {
            throw ParseError("expected " + std::to_string(want) + " tab-separated columns, found " +
                                 std::to_string(cols.size()),
                             line);
        }
        EdgeRecord e{parse_id(trim(cols[0]), line), parse_id(trim(cols[1]), line), {}};
        if (relation_col) {
            e.relation = std::string(trim(cols[2]));
            if (e.relation.empty()) throw ParseError("empty relation name", line);
        }
        if (n && (e.src >= *n || e.dst >= *n)) {
            throw ParseError("node id out of range (n = " + std::to_string(*n) + ")", line);
        }
        edges.push_back(std::move(e));
    }
    return edges;
}

void write_matrix_columns(std::ostream& out, const DenseMatrix& m, bool integral) {
    char buf[64];
    for (std::size_t j = 0; j < m.cols(); ++j) {
        for (std::size_t i = 0; i < m.rows(); ++i) {
            if (i) out << ' ';
            if (integral) {
                out << (m(i, j) != 0.0 ? '1' : '0');
            } else {
                std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
                out << buf;
            }
        }
        out << '\n';
    }
}

DenseMatrix read_matrix_columns(std::istream& in, std::optional<std::size_t> expected_nodes, bool binary) {
    std::vector<std::vector<double>> rows;
    std::string raw;
    std::size_t line = 0;
    std::size_t width = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto toks = split_ws(raw);
        if (toks.empty()) continue;
        if (rows.empty()) width = toks.size();
        if (toks.size() != width) {
            throw ParseError("expected " + std::to_string(width) + " values, found " + std::to_string(toks.size()), line);
        }
        std::vector<double> row;
        row.reserve(width);
        for (auto t : toks) {
            const double v = parse_real(t, line);
            if (binary && v != 0.0 && v != 1.0) throw ParseError("label flags must be 0 or 1", line);
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    if (expected_nodes && rows.size() != *expected_nodes) {
        throw DimensionError("expected " + std::to_string(*expected_nodes) + " node rows, found " +
                             std::to_string(rows.size()));
    }
    DenseMatrix m(width, rows.size());
    for (std::size_t j = 0; j < rows.size(); ++j)
        for (std::size_t i = 0; i < width; ++i) m(i, j) = rows[j][i];
    return m;
}

}  // namespace

Graph load_edge_list(std::istream& in, std::size_t n) {
    std::vector<SparseAdjacency::Triplet> t;
    for (const auto& e : read_edges(in, n, false)) t.push_back({e.src, e.dst, 1.0});
    return Graph{SparseAdjacency::from_triplets(n, std::move(t), SparseAdjacency::Duplicates::collapse_to_one), true};
}

HeteroGraph load_edge_list_hetero(std::istream& in, std::size_t n) {
    std::vector<std::string> names;
    std::map<std::string, std::vector<SparseAdjacency::Triplet>> by_relation;
    for (const auto& e : read_edges(in, n, true)) {
        auto [it, inserted] = by_relation.try_emplace(e.relation);
        if (inserted) names.push_back(e.relation);
        it->second.push_back({e.src, e.dst, 1.0});
    }
    HeteroGraph g{n, {}};
    for (const auto& name : names) {
        g.relations.push_back(
            {name, SparseAdjacency::from_triplets(n, std::move(by_relation[name]), SparseAdjacency::Duplicates::collapse_to_one)});
    }
    return g;
}

std::size_t scan_node_count(std::istream& in) {
    std::string raw;
    std::size_t best = 0;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto text = trim(raw);
        if (text.empty()) continue;
        const auto cols = split(text, '\t');
        if (cols.size() < 2) throw ParseError("expected at least 2 tab-separated columns", line);
        best = std::max({best, parse_id(trim(cols[0]), line) + 1, parse_id(trim(cols[1]), line) + 1});
    }
    return best;
}

void write_edge_list(std::ostream& out, const Graph& g) {
    for (const auto& t : g.adjacency.triplets()) out << t.row << '\t' << t.col << '\n';
}

void write_edge_list(std::ostream& out, const HeteroGraph& g) {
    for (const auto& r : g.relations)
        for (const auto& t : r.adjacency.triplets()) out << t.row << '\t' << t.col << '\t' << r.name << '\n';
}

DenseMatrix load_features(std::istream& in, std::optional<std::size_t> expected_nodes) {
    return read_matrix_columns(in, expected_nodes, false);
}

DenseMatrix load_labels(std::istream& in, std::optional<std::size_t> expected_nodes) {
    return read_matrix_columns(in, expected_nodes, true);
}

Splits load_splits(std::istream& in, std::size_t n) {
    Splits s;
    std::vector<std::size_t>* current = nullptr;
    std::string raw;
    std::size_t line = 0;
    bool seen[3] = {false, false, false};
    while (std::getline(in, raw)) {
        ++line;
        for (auto tok : split_ws(raw)) {
            if (tok.back() == ':') {
                const auto name = tok.substr(0, tok.size() - 1);
                int which = name == "train" ? 0 : name == "val" ? 1 : name == "test" ? 2 : -1;
                if (which < 0) throw ParseError("unknown split section '" + std::string(name) + "'", line);
                if (seen[which]) throw ParseError("duplicate split section '" + std::string(name) + "'", line);
                seen[which] = true;
                current = which == 0 ? &s.train : which == 1 ? &s.val : &s.test;
                continue;
            }
            if (!current) throw ParseError("node id before any section header", line);
            const std::size_t id = parse_id(tok, line);
            if (id >= n) throw ParseError("node id " + std::to_string(id) + " out of range", line);
            current->push_back(id);
        }
    }
    return s;
}

void write_features(std::ostream& out, const DenseMatrix& features) { write_matrix_columns(out, features, false); }
void write_labels(std::ostream& out, const DenseMatrix& labels) { write_matrix_columns(out, labels, true); }

void write_splits(std::ostream& out, const Splits& splits) {
    auto section = [&](const char* name, const std::vector<std::size_t>& ids) {
        out << name << '\n';
        for (std::size_t k = 0; k < ids.size(); ++k) out << (k ? " " : "") << ids[k];
        out << '\n';
    };
    section("train:", splits.train);
    section("val:", splits.val);
    section("test:", splits.test);
}

}  // namespace ignn
