#include "treebec/graph.hpp"

#include <cmath>
#include <sstream>

#include "treebec/error.hpp"

namespace treebec::graph {

std::string kind_token(const ModelSpec& spec) {
    switch (spec.kind) {
        case Kind::Tree: return "Tree";
        case Kind::HQ: return "HQ";
        case Kind::GQq: return "GQq:" + std::to_string(spec.q);
    }
    return "?";
}

std::string mode_token(Mode mode) {
    return mode == Mode::DiagonalUnit ? "DiagonalUnit" : "EdgeDouble";
}

Mode parse_mode(std::string_view token) {
    if (token == "DiagonalUnit") return Mode::DiagonalUnit;
    if (token == "EdgeDouble") return Mode::EdgeDouble;
    throw ConfigError("unknown perturbation mode '" + std::string(token) + "'");
}

ModelSpec parse_kind(std::string_view token, int Q, Mode mode) {
    ModelSpec s;
    s.Q = Q;
    s.mode = mode;
    if (token == "Tree") {
        s.kind = Kind::Tree;
    } else if (token == "HQ") {
        s.kind = Kind::HQ;
    } else if (token.starts_with("GQq:")) {
        s.kind = Kind::GQq;
        try {
            s.q = std::stoi(std::string(token.substr(4)));
        } catch (const std::exception&) {
            throw ConfigError("bad GQq token '" + std::string(token) + "'");
        }
    } else {
        throw ConfigError("unknown model kind '" + std::string(token) + "'");
    }
    return s;
}

int max_degree_for(int q) {
    const double r = std::sqrt(double(q - 1));
    const double t = 2.0 * r + 1.0 + std::sqrt(4.0 * r + 1.0);
    return static_cast<int>(std::floor(t * t / 4.0)) + 1;
}

std::int64_t ball_size(int Q, int n) {
    if (Q < 2 || n < 0) throw DomainError("ball_size: need Q >= 2 and n >= 0");
    std::int64_t total = 1, shell = Q;
    for (int d = 1; d <= n; ++d) {
        total += shell;
        if (total > (std::int64_t{1} << 50)) return total;
        shell *= (Q - 1);
    }
    return total;
}

TreeBall build_ball(int Q, int n, std::int64_t capacity) {
    if (Q < 2) throw DomainError("build_ball: Q must be at least 2");
    if (n < 0) throw DomainError("build_ball: negative radius");
    const auto count = ball_size(Q, n);
    if (count > capacity)
        throw CapacityError("ball of radius " + std::to_string(n) + " with Q=" + std::to_string(Q) +
                            " has " + std::to_string(count) + " vertices, limit " +
                            std::to_string(capacity));
    TreeBall b;
    b.Q = Q;
    b.radius = n;
    b.parent.reserve(count);
    b.depth.reserve(count);
    b.first_child.assign(count, 0);
    b.child_count.assign(count, 0);
    b.parent.push_back(-1);
    b.depth.push_back(0);
    for (std::int64_t v = 0; v < count; ++v) {
        const int d = b.depth[v];
        const int kids = d == n ? 0 : (v == 0 ? Q : Q - 1);
        b.first_child[v] = b.size();
        b.child_count[v] = kids;
        for (int k = 0; k < kids; ++k) {
            b.parent.push_back(static_cast<std::int32_t>(v));
            b.depth.push_back(d + 1);
        }
    }
    return b;
}

namespace {

CsrMatrix assemble(const TreeBall& b, const std::vector<std::uint8_t>* in_base, Mode mode) {
    CsrMatrix a;
    const auto n = b.size();
    a.n = n;
    a.row_ptr.assign(n + 1, 0);
    a.col.reserve(2 * (n - 1) + n);
    a.val.reserve(2 * (n - 1) + n);
    auto edge_weight = [&](std::int64_t u, std::int64_t v) {
        if (in_base && mode == Mode::EdgeDouble && (*in_base)[u] && (*in_base)[v]) return 2.0;
        return 1.0;
    };
    for (std::int64_t v = 0; v < n; ++v) {
        if (b.parent[v] >= 0) {
            a.col.push_back(b.parent[v]);
            a.val.push_back(edge_weight(v, b.parent[v]));
        }
        if (in_base && mode == Mode::DiagonalUnit && (*in_base)[v]) {
            a.col.push_back(static_cast<std::int32_t>(v));
            a.val.push_back(1.0);
        }
        for (int k = 0; k < b.child_count[v]; ++k) {
            const auto c = b.first_child[v] + k;
            a.col.push_back(static_cast<std::int32_t>(c));
            a.val.push_back(edge_weight(v, c));
        }
        a.row_ptr[v + 1] = a.nnz();
    }
    return a;
}

void check_ranges(const ModelSpec& s, std::vector<std::string>& warnings) {
    if (s.Q < 2) throw DomainError("Q must be at least 2");
    switch (s.kind) {
        case Kind::Tree: break;
        case Kind::HQ:
            if (s.Q <= 2 || s.Q > 7)
                warnings.push_back("HQ with Q=" + std::to_string(s.Q) +
                                   " is outside the theorem range 2 < Q <= 7");
            break;
        case Kind::GQq:
            if (s.q < 2) throw DomainError("GQq needs q >= 2");
            if (s.q >= s.Q)
                throw DomainError("GQq needs q < Q (got q=" + std::to_string(s.q) +
                                  ", Q=" + std::to_string(s.Q) + ")");
            if (s.Q > max_degree_for(s.q))
                warnings.push_back("GQq with Q=" + std::to_string(s.Q) + ", q=" + std::to_string(s.q) +
                                   " is outside the theorem range Q <= " +
                                   std::to_string(max_degree_for(s.q)));
            break;
    }
}

}  // namespace

CsrMatrix tree_adjacency(const TreeBall& ball) { return assemble(ball, nullptr, Mode::DiagonalUnit); }

Model perturb(TreeBall ball, const ModelSpec& spec) {
    Model m;
    check_ranges(spec, m.warnings);
    if (spec.Q != ball.Q) throw DomainError("perturb: spec Q differs from the ball's Q");
    m.spec = spec;
    m.in_base.assign(ball.size(), 0);
    if (spec.kind == Kind::HQ) {
        std::int64_t v = 0;
        m.in_base[0] = 1;
        for (int d = 1; d <= ball.radius; ++d) {
            v = ball.first_child[v];
            m.in_base[v] = 1;
        }
    } else if (spec.kind == Kind::GQq) {
        m.in_base[0] = 1;
        for (std::int64_t v = 0; v < ball.size(); ++v) {
            if (!m.in_base[v]) continue;
            const int take = std::min<int>(ball.child_count[v], v == 0 ? spec.q : spec.q - 1);
            for (int k = 0; k < take; ++k) m.in_base[ball.first_child[v] + k] = 1;
        }
    }
    for (std::int64_t v = 0; v < ball.size(); ++v)
        if (m.in_base[v]) m.base.push_back(static_cast<std::int32_t>(v));
    m.adjacency = assemble(ball, &m.in_base, spec.mode);
    m.ball = std::move(ball);
    return m;
}

Model build_model(const ModelSpec& spec, int n, std::int64_t capacity) {
    return perturb(build_ball(spec.Q, n, capacity), spec);
}

BaseDistance base_distance(const Model& m) {
    if (m.base.empty()) throw PreconditionError("base_distance: model has an empty base set");
    BaseDistance r;
    const auto n = m.size();
    r.dist.assign(n, 0);
    r.anchor.assign(n, 0);
    // Parents precede children in BFS order and S is root-anchored, so one sweep suffices.
    for (std::int64_t v = 0; v < n; ++v) {
        if (m.in_base[v]) {
            r.anchor[v] = static_cast<std::int32_t>(v);
        } else {
            const auto p = m.ball.parent[v];
            r.dist[v] = r.dist[p] + 1;
            r.anchor[v] = r.anchor[p];
        }
    }
    return r;
}

int tree_distance(const TreeBall& b, std::int32_t x, std::int32_t y) {
    int d = 0;
    while (x != y) {
        if (b.depth[x] >= b.depth[y]) x = b.parent[x];
        else y = b.parent[y];
        ++d;
    }
    return d;
}

BaseGeometry base_geometry(const ModelSpec& spec, int radius, std::int64_t capacity) {
    BaseGeometry g;
    if (spec.kind == Kind::Tree) return g;
    if (spec.kind == Kind::HQ) {
        if (radius + 1 > capacity) throw CapacityError("base geometry exceeds capacity");
        g.parent.resize(radius + 1);
        g.depth.resize(radius + 1);
        for (int k = 0; k <= radius; ++k) {
            g.parent[k] = k - 1;
            g.depth[k] = k;
        }
    } else {
        const auto ball = build_ball(spec.q, radius, capacity);
        g.parent = ball.parent;
        g.depth = ball.depth;
    }
    g.degree.assign(g.parent.size(), 0);
    for (std::size_t v = 1; v < g.parent.size(); ++v) {
        ++g.degree[v];
        ++g.degree[g.parent[v]];
    }
    return g;
}

std::string dump(const Model& m) {
    std::ostringstream out;
    out << m.spec.Q << ' ' << m.radius() << ' ' << kind_token(m.spec) << ' '
        << mode_token(m.spec.mode) << ' ' << m.size() << '\n';
    for (std::int64_t v = 1; v < m.size(); ++v)
        out << v << ' ' << m.ball.parent[v] << ' ' << m.ball.depth[v] << ' '
            << int(m.in_base[v]) << '\n';
    return out.str();
}

Model parse_dump(std::string_view text) {
    std::istringstream in{std::string(text)};
    int Q = 0, n = 0;
    std::string kind, mode;
    std::int64_t count = 0;
    std::string skip;
    while ((in >> std::ws).peek() == '#') std::getline(in, skip);
    if (!(in >> Q >> n >> kind >> mode >> count)) throw ConfigError("graph dump: malformed header");
    auto m = build_model(parse_kind(kind, Q, parse_mode(mode)), n);
    if (m.size() != count) throw ConfigError("graph dump: vertex count does not match header");
    for (std::int64_t v = 1; v < count; ++v) {
        std::int64_t idx = 0, parent = 0, depth = 0, flag = 0;
        if (!(in >> idx >> parent >> depth >> flag)) throw ConfigError("graph dump: truncated body");
        if (idx != v || parent != m.ball.parent[v] || depth != m.ball.depth[v] ||
            flag != m.in_base[v])
            throw ConfigError("graph dump: line for vertex " + std::to_string(v) +
                              " disagrees with the canonical construction");
    }
    return m;
}

}  // namespace treebec::graph
