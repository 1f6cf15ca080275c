#include "kcq/envs.hpp"
#include "kcq/errors.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <sstream>

namespace kcq {

GridSpec GridSpec::empty(int rows, int cols) {
    GridSpec spec;
    spec.rows = rows;
    spec.cols = cols;
    spec.cells.assign(static_cast<std::size_t>(std::max(rows, 0) * std::max(cols, 0)), CellSpec{});
    return spec;
}

std::vector<std::string> validate_grid(const GridSpec& spec) {
    std::vector<std::string> issues;
    if (spec.rows <= 0 || spec.cols <= 0) {
        issues.push_back("grid dimensions must be positive");
        return issues;
    }
    if (spec.cells.size() != static_cast<std::size_t>(spec.rows * spec.cols)) {
        issues.push_back("cell table size mismatch");
        return issues;
    }
    if (spec.start_row < 0 || spec.start_row >= spec.rows || spec.start_col < 0 || spec.start_col >= spec.cols) {
        issues.push_back("start cell out of range");
    } else {
        const CellSpec& start = spec.at(spec.start_row, spec.start_col);
        if (start.wall) issues.push_back("start cell is a wall");
        if (start.sink) issues.push_back("start cell is a sink");
    }
    for (int r = 0; r < spec.rows; ++r) {
        for (int c = 0; c < spec.cols; ++c) {
            const CellSpec& cell = spec.at(r, c);
            const std::string where = "cell (" + std::to_string(r) + "," + std::to_string(c) + ")";
            const int kinds = int(cell.wall) + int(cell.sink) + int(cell.force_right) + int(cell.oneway_right) +
                              int(cell.gate_p_right.has_value());
            if (kinds > 1) issues.push_back(where + " combines exclusive flags");
            if (cell.gate_p_right && !(*cell.gate_p_right > 0.0 && *cell.gate_p_right < 1.0))
                issues.push_back(where + " gate probability outside (0,1)");
            if (!spec.ap.empty())
                for (const auto& l : cell.labels)
                    if (std::find(spec.ap.begin(), spec.ap.end(), l) == spec.ap.end())
                        issues.push_back(where + " label '" + l + "' not in ap");
        }
    }
    return issues;
}

namespace {

constexpr std::array<int, kNumMoves> kDr{-1, 1, 0, 0};
constexpr std::array<int, kNumMoves> kDc{0, 0, -1, 1};

// Perpendicular slip directions of each move.
constexpr std::array<std::array<Move, 2>, kNumMoves> kSideways{{
    {Move::Left, Move::Right},
    {Move::Left, Move::Right},
    {Move::Up, Move::Down},
    {Move::Up, Move::Down},
}};

EnvState move_target(const GridSpec& spec, int r, int c, Move m) {
    const auto d = static_cast<std::size_t>(m);
    const int nr = r + kDr[d];
    const int nc = c + kDc[d];
    if (nr < 0 || nr >= spec.rows || nc < 0 || nc >= spec.cols) return spec.state_of(r, c);
    const CellSpec& target = spec.at(nr, nc);
    if (target.wall) return spec.state_of(r, c);
    if (target.oneway_right && m != Move::Right) return spec.state_of(r, c);
    return spec.state_of(nr, nc);
}

std::vector<Outcome> merge(const std::vector<Outcome>& raw) {
    std::map<EnvState, double> acc;
    for (const auto& o : raw) acc[o.next] += o.prob;
    double total = 0.0;
    for (const auto& [s, p] : acc) total += p;
    std::vector<Outcome> out;
    for (const auto& [s, p] : acc) out.push_back({s, p / total});
    return out;
}

}  // namespace

LabeledMdp build_grid(const GridSpec& spec) {
    if (auto issues = validate_grid(spec); !issues.empty()) throw SemanticError(std::move(issues));

    LabeledMdp m;
    m.num_states = static_cast<std::size_t>(spec.rows * spec.cols);
    m.initial = spec.state_of(spec.start_row, spec.start_col);
    m.action_names = {"up", "down", "left", "right"};
    m.available.assign(m.num_states, {});
    m.trans.assign(m.num_states * kNumMoves, {});
    m.labels.assign(m.num_states, 0);

    m.ap = spec.ap;
    for (const auto& cell : spec.cells)
        for (const auto& l : cell.labels)
            if (std::find(m.ap.begin(), m.ap.end(), l) == m.ap.end()) m.ap.push_back(l);
    if (m.ap.size() > kMaxPropositions) throw Error("too many atomic propositions");

    constexpr double kThird = 1.0 / 3.0;
    for (int r = 0; r < spec.rows; ++r) {
        for (int c = 0; c < spec.cols; ++c) {
            const CellSpec& cell = spec.at(r, c);
            const EnvState s = spec.state_of(r, c);
            for (const auto& l : cell.labels) {
                const auto idx = std::find(m.ap.begin(), m.ap.end(), l) - m.ap.begin();
                m.labels[s] |= PropSet{1} << idx;
            }
            const auto set = [&](Move mv, std::vector<Outcome> raw) {
                const auto a = static_cast<ActionId>(mv);
                m.available[s].push_back(a);
                m.trans[s * kNumMoves + a] = merge(raw);
            };
            if (cell.wall || cell.sink) {
                set(Move::Up, {{s, 1.0}});
            } else if (cell.gate_p_right) {
                const double p = *cell.gate_p_right;
                set(Move::Right, {{move_target(spec, r, c, Move::Right), p}, {move_target(spec, r, c, Move::Down), 1.0 - p}});
            } else if (cell.force_right || cell.oneway_right) {
                set(Move::Right, {{move_target(spec, r, c, Move::Right), 1.0}});
            } else {
                for (std::size_t d = 0; d < kNumMoves; ++d) {
                    const auto mv = static_cast<Move>(d);
                    if (cell.ice) {
                        set(mv, {{move_target(spec, r, c, mv), kThird},
                                 {move_target(spec, r, c, kSideways[d][0]), kThird},
                                 {move_target(spec, r, c, kSideways[d][1]), kThird}});
                    } else {
                        set(mv, {{move_target(spec, r, c, mv), 1.0}});
                    }
                }
            }
        }
    }
    return m;
}

GridSpec probabilistic_gate_spec(double p_right) {
    GridSpec spec = GridSpec::empty(4, 10);
    spec.ap = {"a", "c"};
    spec.start_row = 1;
    spec.start_col = 0;
    for (int c = 0; c < 9; ++c) {
        spec.at(0, c).force_right = true;
        spec.at(0, c).labels = {"a"};
    }
    spec.at(0, 9).sink = true;
    for (int c = 1; c < 9; ++c) spec.at(1, c).force_right = true;
    spec.at(1, 9).sink = true;
    spec.at(2, 0).gate_p_right = p_right;
    spec.at(2, 9).sink = true;
    spec.at(2, 9).labels = {"a"};
    spec.at(3, 0).sink = true;
    spec.at(3, 0).labels = {"c"};
    for (int c = 1; c < 10; ++c) spec.at(3, c).wall = true;
    return spec;
}

LabeledMdp build_probabilistic_gate() { return build_grid(probabilistic_gate_spec()); }

LabeledMdp build_frozen_lake(const GridSpec& spec) {
    if (spec.rows != 8 || spec.cols != 8) throw SemanticError({"frozen lake must be 8x8"});
    if (spec.start_row >= 0 && spec.start_row < 8 && spec.start_col >= 0 && spec.start_col < 8) {
        const auto& start = spec.at(spec.start_row, spec.start_col);
        if (start.sink || std::find(start.labels.begin(), start.labels.end(), "h") != start.labels.end())
            throw SemanticError({"start cell is a hole"});
    }
    return build_grid(spec);
}

LabeledMdp build_office_world(const GridSpec& spec) {
    std::vector<std::string> issues = validate_grid(spec);
    const bool has_gate = std::any_of(spec.cells.begin(), spec.cells.end(), [](const CellSpec& c) { return c.oneway_right; });
    if (!has_gate) issues.push_back("office world needs at least one one-way gate");
    if (!issues.empty()) throw SemanticError(std::move(issues));
    return build_grid(spec);
}

GridSpec parse_grid_spec(std::string_view text) {
    const auto dirs = text::directives(text);
    GridSpec spec;
    bool have_grid = false;
    bool have_start = false;

    const auto cell_ref = [&](const std::vector<text::Token>& toks, std::size_t line, std::size_t col) {
        if (!have_grid) throw ParseError("'grid' must come before cell references", line, col);
        if (toks.size() < 2) throw ParseError("expected row and column", line, col);
        const long long r = text::parse_int(toks[0], line);
        const long long c = text::parse_int(toks[1], line);
        if (r < 0 || r >= spec.rows) throw ParseError("row out of range", line, toks[0].column);
        if (c < 0 || c >= spec.cols) throw ParseError("column out of range", line, toks[1].column);
        return std::pair<int, int>(static_cast<int>(r), static_cast<int>(c));
    };

    for (const auto& d : dirs) {
        const auto toks = text::tokenize(d.value, d.value_column);
        if (d.key == "grid") {
            if (have_grid) throw ParseError("duplicate 'grid' directive", d.line, d.key_column);
            if (toks.size() != 2) throw ParseError("expected 'grid: R C'", d.line, d.value_column);
            const long long rows = text::parse_int(toks[0], d.line);
            const long long cols = text::parse_int(toks[1], d.line);
            if (rows <= 0 || cols <= 0 || rows * cols > 1'000'000)
                throw ParseError("grid dimensions must be positive", d.line, d.value_column);
            const auto ap = spec.ap;
            spec = GridSpec::empty(static_cast<int>(rows), static_cast<int>(cols));
            spec.ap = ap;
            have_grid = true;
        } else if (d.key == "start") {
            const auto [r, c] = cell_ref(toks, d.line, d.value_column);
            if (toks.size() != 2) throw ParseError("expected 'start: r c'", d.line, d.value_column);
            spec.start_row = r;
            spec.start_col = c;
            have_start = true;
        } else if (d.key == "ap") {
            for (const auto& t : toks) spec.ap.emplace_back(t.text);
        } else if (d.key == "cell") {
            const auto [r, c] = cell_ref(toks, d.line, d.value_column);
            CellSpec& cell = spec.at(r, c);
            for (std::size_t i = 2; i < toks.size(); ++i) {
                const auto flag = toks[i].text;
                if (flag == "wall") {
                    cell.wall = true;
                } else if (flag == "ice") {
                    cell.ice = true;
                } else if (flag == "sink") {
                    cell.sink = true;
                } else if (flag == "force-right") {
                    cell.force_right = true;
                } else if (flag == "oneway-right") {
                    cell.oneway_right = true;
                } else if (flag == "gate") {
                    if (i + 1 >= toks.size() || toks[i + 1].text.substr(0, 2) != "p=")
                        throw ParseError("expected 'gate p=<float>'", d.line, toks[i].column);
                    ++i;
                    const text::Token prob{toks[i].text.substr(2), toks[i].column + 2};
                    cell.gate_p_right = text::parse_double(prob, d.line);
                } else {
                    throw ParseError("unknown cell flag '" + std::string(flag) + "'", d.line, toks[i].column);
                }
            }
        } else if (d.key == "label") {
            const auto [r, c] = cell_ref(toks, d.line, d.value_column);
            std::string body;
            for (std::size_t i = 2; i < toks.size(); ++i) body += toks[i].text;
            if (body.size() < 2 || body.front() != '{' || body.back() != '}')
                throw ParseError("expected '{props}'", d.line, toks.size() > 2 ? toks[2].column : d.value_column);
            body = body.substr(1, body.size() - 2);
            CellSpec& cell = spec.at(r, c);
            std::size_t pos = 0;
            while (!body.empty()) {
                const auto comma = body.find(',', pos);
                std::string name = body.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
                if (name.empty()) throw ParseError("empty proposition", d.line, toks[2].column);
                if (std::find(cell.labels.begin(), cell.labels.end(), name) == cell.labels.end())
                    cell.labels.push_back(std::move(name));
                if (comma == std::string::npos) break;
                pos = comma + 1;
            }
        } else {
            throw ParseError("unknown directive '" + std::string(d.key) + "'", d.line, d.key_column);
        }
    }
    if (!have_grid) throw ParseError("missing 'grid' directive", dirs.empty() ? 1 : dirs.front().line, 1);
    if (!have_start) throw ParseError("missing 'start' directive", dirs.back().line, 1);
    return spec;
}

std::string format_grid_spec(const GridSpec& spec) {
    std::ostringstream out;
    out << "grid: " << spec.rows << ' ' << spec.cols << '\n';
    out << "start: " << spec.start_row << ' ' << spec.start_col << '\n';
    if (!spec.ap.empty()) {
        out << "ap:";
        for (const auto& p : spec.ap) out << ' ' << p;
        out << '\n';
    }
    for (int r = 0; r < spec.rows; ++r) {
        for (int c = 0; c < spec.cols; ++c) {
            const CellSpec& cell = spec.at(r, c);
            std::string flags;
            if (cell.wall) flags += " wall";
            if (cell.ice) flags += " ice";
            if (cell.sink) flags += " sink";
            if (cell.force_right) flags += " force-right";
            if (cell.oneway_right) flags += " oneway-right";
            if (cell.gate_p_right) {
                std::ostringstream p;
                p.precision(17);
                p << *cell.gate_p_right;
                flags += " gate p=" + p.str();
            }
            if (!flags.empty()) out << "cell: " << r << ' ' << c << flags << '\n';
            if (!cell.labels.empty()) {
                out << "label: " << r << ' ' << c << " {";
                for (std::size_t i = 0; i < cell.labels.size(); ++i) out << (i ? "," : "") << cell.labels[i];
                out << "}\n";
            }
        }
    }
    return out.str();
}

}  // namespace kcq
