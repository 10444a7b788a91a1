#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "treebec/kernels.hpp"

namespace treebec::graph {

inline constexpr std::int64_t kDefaultCapacity = 2'000'000;

// Tree is the unperturbed homogeneous tree; HQ carries a ray, GQq a q-regular subtree.
enum class Kind { Tree, HQ, GQq };
enum class Mode { DiagonalUnit, EdgeDouble };

struct ModelSpec {
    Kind kind = Kind::HQ;
    int Q = 3;
    int q = 2;  // GQq only
    Mode mode = Mode::DiagonalUnit;

    bool operator==(const ModelSpec&) const = default;
};

std::string kind_token(const ModelSpec& spec);  // "Tree", "HQ", "GQq:3"
std::string mode_token(Mode mode);
ModelSpec parse_kind(std::string_view token, int Q, Mode mode);
Mode parse_mode(std::string_view token);

// Largest Q admitted for GQq with this q, Q(q) = floor((2 sqrt(q-1) + 1 + sqrt(4 sqrt(q-1) + 1))^2 / 4) + 1.
int max_degree_for(int q);

// Radius-n ball of the Q-homogeneous tree. Vertices are numbered in BFS order;
// the children of v occupy [first_child[v], first_child[v] + child_count[v]).
struct TreeBall {
    int Q = 0;
    int radius = 0;
    std::vector<std::int32_t> parent;  // parent[0] == -1
    std::vector<std::int32_t> depth;
    std::vector<std::int64_t> first_child;
    std::vector<std::int32_t> child_count;

    std::int64_t size() const { return static_cast<std::int64_t>(parent.size()); }
};

std::int64_t ball_size(int Q, int n);
TreeBall build_ball(int Q, int n, std::int64_t capacity = kDefaultCapacity);

// Finite volume Lambda_n: the ball with the root-anchored base set S_n and its adjacency.
struct Model {
    ModelSpec spec;
    TreeBall ball;
    std::vector<std::uint8_t> in_base;
    std::vector<std::int32_t> base;  // S_n in BFS order
    CsrMatrix adjacency;
    std::vector<std::string> warnings;

    int radius() const { return ball.radius; }
    std::int64_t size() const { return ball.size(); }
};

Model perturb(TreeBall ball, const ModelSpec& spec);
Model build_model(const ModelSpec& spec, int n, std::int64_t capacity = kDefaultCapacity);
CsrMatrix tree_adjacency(const TreeBall& ball);

// Distance to S and the nearest point of S (unique, S is convex).
struct BaseDistance {
    std::vector<std::int32_t> dist;
    std::vector<std::int32_t> anchor;
};
BaseDistance base_distance(const Model& model);

// Tree distance between two vertices of the same ball.
int tree_distance(const TreeBall& ball, std::int32_t x, std::int32_t y);

// S as an abstract rooted tree, indexed in the same BFS order as Model::base.
// For HQ it is a ray, for GQq a q-regular ball, for Tree it is empty.
struct BaseGeometry {
    std::vector<std::int32_t> parent;
    std::vector<std::int32_t> depth;
    std::vector<std::int32_t> degree;  // degree inside S

    std::int64_t size() const { return static_cast<std::int64_t>(parent.size()); }
};
BaseGeometry base_geometry(const ModelSpec& spec, int radius,
                           std::int64_t capacity = kDefaultCapacity);

std::string dump(const Model& model);
Model parse_dump(std::string_view text);

}  // namespace treebec::graph
