#include "spatecon/weights.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace spatecon {

std::string_view to_string(WeightKind kind)
{
    switch (kind) {
    case WeightKind::Queen: return "queen";
    case WeightKind::Rook: return "rook";
    case WeightKind::DistanceBand: return "distance_band";
    }
    return "?";
}

std::string_view to_string(DistanceMetric metric)
{
    switch (metric) {
    case DistanceMetric::Euclidean: return "euclidean";
    case DistanceMetric::Arc: return "arc";
    case DistanceMetric::Manhattan: return "manhattan";
    }
    return "?";
}

std::vector<std::uint32_t> WeightMatrix::islands() const
{
    std::vector<std::uint32_t> out;
    for (std::size_t i = 0; i < n; ++i)
        if (rows[i].empty())
            out.push_back(std::uint32_t(i));
    return out;
}

double WeightMatrix::row_sum(std::size_t i) const
{
    double s = 0.0;
    for (const auto& e : rows[i])
        s += e.weight;
    return s;
}

arma::vec WeightMatrix::spmv(const arma::vec& x) const
{
    arma::vec y(n, arma::fill::zeros);
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& e : rows[i])
            y(i) += e.weight * x(e.col);
    return y;
}

arma::vec WeightMatrix::spmv_transpose(const arma::vec& x) const
{
    arma::vec y(n, arma::fill::zeros);
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& e : rows[i])
            y(e.col) += e.weight * x(i);
    return y;
}

arma::mat WeightMatrix::spmm(const arma::mat& a) const
{
    arma::mat b(n, a.n_cols, arma::fill::zeros);
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& e : rows[i])
            b.row(i) += e.weight * a.row(e.col);
    return b;
}

arma::mat WeightMatrix::dense() const
{
    arma::mat d(n, n, arma::fill::zeros);
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& e : rows[i])
            d(i, e.col) = e.weight;
    return d;
}

void WeightMatrix::moment_sums(double& s0, double& s1, double& s2) const
{
    std::vector<std::unordered_map<std::uint32_t, double>> lookup(n);
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& e : rows[i])
            lookup[i][e.col] = e.weight;

    s0 = 0.0;
    s1 = 0.0;
    arma::vec row_sums(n, arma::fill::zeros), col_sums(n, arma::fill::zeros);
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& e : rows[i]) {
            s0 += e.weight;
            row_sums(i) += e.weight;
            col_sums(e.col) += e.weight;
            double w_ji = 0.0;
            auto it = lookup[e.col].find(std::uint32_t(i));
            if (it != lookup[e.col].end())
                w_ji = it->second;
            double pair = e.weight + w_ji;
            // each stored nonzero carries its own ordered-pair half; a zero
            // mirror entry of an asymmetric pair is folded in here too
            s1 += 0.5 * pair * pair;
            if (w_ji == 0.0)
                s1 += 0.5 * pair * pair;
        }
    }
    s2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double t = row_sums(i) + col_sums(i);
        s2 += t * t;
    }
}

void WeightMatrix::validate() const
{
    if (rows.size() != n)
        throw std::runtime_error("weights: row count mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& e : rows[i]) {
            if (e.col == i)
                throw std::runtime_error("weights: self-weight at row " + std::to_string(i));
            if (!(e.weight > 0.0))
                throw std::runtime_error("weights: non-positive weight at row " + std::to_string(i));
            if (e.col >= n)
                throw std::runtime_error("weights: column out of range at row " + std::to_string(i));
        }
    }
}

namespace {

// Snap a coordinate to the shared-vertex grid. Real county borders carry
// floating-point jitter; 1e-9 degrees is far below any real vertex spacing.
std::int64_t snap(double coord)
{
    return std::llround(coord * 1e9);
}

struct VertexKey {
    std::int64_t x, y;
    bool operator<(const VertexKey& o) const { return x < o.x || (x == o.x && y < o.y); }
    bool operator==(const VertexKey& o) const { return x == o.x && y == o.y; }
};

struct EdgeKey {
    VertexKey a, b;
    bool operator<(const EdgeKey& o) const { return a < o.a || (a == o.a && b < o.b); }
};

} // namespace

WeightMatrix contiguity_weights(const SpatialDataset& ds, WeightKind kind, const ExecSpec& exec)
{
    if (kind != WeightKind::Queen && kind != WeightKind::Rook)
        throw std::invalid_argument("contiguity_weights: kind must be queen or rook");
    const std::size_t n = ds.n();

    // index boundary primitives to the features touching them
    std::map<VertexKey, std::vector<std::uint32_t>> vertex_map;
    std::map<EdgeKey, std::vector<std::uint32_t>> edge_map;
    for (std::size_t f = 0; f < n; ++f) {
        for (const auto& ring : ds.features[f].polygon.rings) {
            const auto& pts = ring.points;
            for (std::size_t v = 0; v + 1 < pts.size(); ++v) {
                VertexKey key{snap(pts[v].lon), snap(pts[v].lat)};
                auto& owners = vertex_map[key];
                if (owners.empty() || owners.back() != f)
                    owners.push_back(std::uint32_t(f));
                if (kind == WeightKind::Rook) {
                    VertexKey next{snap(pts[v + 1].lon), snap(pts[v + 1].lat)};
                    if (key == next)
                        continue; // degenerate zero-length edge
                    EdgeKey edge = key < next ? EdgeKey{key, next} : EdgeKey{next, key};
                    auto& eowners = edge_map[edge];
                    if (eowners.empty() || eowners.back() != f)
                        eowners.push_back(std::uint32_t(f));
                }
            }
        }
    }

    // merging shared-primitive owners into per-feature sets is map-bound,
    // not worth parallelizing; exec is accepted for interface symmetry
    (void)exec;
    std::vector<std::set<std::uint32_t>> neighbor_sets(n);
    auto link = [&](const std::vector<std::uint32_t>& owners) {
        for (std::size_t a = 0; a < owners.size(); ++a)
            for (std::size_t b = a + 1; b < owners.size(); ++b) {
                neighbor_sets[owners[a]].insert(owners[b]);
                neighbor_sets[owners[b]].insert(owners[a]);
            }
    };
    if (kind == WeightKind::Queen) {
        for (const auto& [key, owners] : vertex_map)
            link(owners);
    } else {
        for (const auto& [key, owners] : edge_map)
            link(owners);
    }

    WeightMatrix w;
    w.n = n;
    w.kind = kind;
    w.rows.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::uint32_t j : neighbor_sets[i])
            w.rows[i].push_back({j, 1.0});
    w.validate();
    return w;
}

WeightMatrix distance_band_weights(const SpatialDataset& ds, DistanceMetric metric, double threshold,
                                   int min_neighbors, const ExecSpec& exec)
{
    const std::size_t n = ds.n();
    if (n < 2)
        throw std::runtime_error("distance_band_weights: need at least 2 features");
    if (!(threshold > 0.0))
        throw std::runtime_error("distance_band_weights: threshold must be positive");
    if (min_neighbors < 0 || std::size_t(min_neighbors) >= n)
        throw std::runtime_error("distance_band_weights: min_neighbors out of range");

    std::vector<LonLat> centroids = ds.centroids();
    WeightMatrix w;
    w.n = n;
    w.kind = WeightKind::DistanceBand;
    w.metric = metric;
    w.rows.resize(n);

    auto one_row = [&](std::size_t i) {
        std::vector<std::pair<double, std::uint32_t>> dists;
        dists.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i)
                continue;
            dists.emplace_back(point_distance(centroids[i], centroids[j], metric), std::uint32_t(j));
        }
        std::vector<WeightMatrix::Entry> row;
        for (const auto& [d, j] : dists)
            if (d <= threshold)
                row.push_back({j, 1.0});
        if (row.size() < std::size_t(min_neighbors)) {
            std::sort(dists.begin(), dists.end(), [](const auto& a, const auto& b) {
                return a.first < b.first || (a.first == b.first && a.second < b.second);
            });
            row.clear();
            for (int k = 0; k < min_neighbors; ++k)
                row.push_back({dists[std::size_t(k)].second, 1.0});
            std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.col < b.col; });
        }
        w.rows[i] = std::move(row);
    };

    const long nl = static_cast<long>(n);
    if (exec.mode == Exec::OpenMP) {
#pragma omp parallel for schedule(static) num_threads(exec.resolved_threads())
        for (long i = 0; i < nl; ++i)
            one_row(std::size_t(i));
    } else {
        for (long i = 0; i < nl; ++i)
            one_row(std::size_t(i));
    }
    w.validate();
    return w;
}

WeightMatrix row_standardize(const WeightMatrix& w)
{
    if (w.row_standardized)
        throw std::runtime_error("row_standardize: weights already standardized");
    WeightMatrix out = w;
    out.row_standardized = true;
    for (std::size_t i = 0; i < out.n; ++i) {
        double s = out.row_sum(i);
        if (s <= 0.0)
            continue; // island
        for (auto& e : out.rows[i])
            e.weight /= s;
    }
    return out;
}

namespace {

// Deterministic power iteration for the extreme eigenvalues of W; used only
// above the dense cutoff. An estimate, not an eigensolve: lattice-like
// spectra have O(1/n) edge gaps, so the iteration budget is generous.
std::pair<double, double> extreme_eigenvalues_iterative(const WeightMatrix& w)
{
    const std::size_t n = w.n;
    auto iterate = [&](double shift) {
        arma::vec v(n);
        for (std::size_t i = 0; i < n; ++i)
            v(i) = 1.0 + 1e-3 * double(i % 17);
        v /= arma::norm(v);
        double lambda = 0.0;
        for (int it = 0; it < 20000; ++it) {
            arma::vec next = w.spmv(v) - shift * v;
            double norm = arma::norm(next);
            if (norm < 1e-300)
                break;
            next /= norm;
            double new_lambda = arma::dot(next, w.spmv(next));
            if (std::fabs(new_lambda - lambda) < 1e-14 && it > 100) {
                lambda = new_lambda;
                break;
            }
            lambda = new_lambda;
            v = next;
        }
        return lambda;
    };
    double omega_max = iterate(0.0);
    double omega_min = iterate(omega_max); // shifted spectrum puts the other extreme on top
    return {omega_min, omega_max};
}

} // namespace

WeightEigen weight_eigenvalues(const WeightMatrix& w)
{
    constexpr std::size_t kDenseCutoff = 5000;
    WeightEigen out;
    if (w.n <= kDenseCutoff) {
        arma::cx_vec ev;
        if (!arma::eig_gen(ev, w.dense()))
            throw std::runtime_error("weight_eigenvalues: eigensolver failed");
        out.eigenvalues = ev;
    } else {
        auto [omega_min, omega_max] = extreme_eigenvalues_iterative(w);
        out.eigenvalues = arma::cx_vec(2);
        out.eigenvalues(0) = omega_min;
        out.eigenvalues(1) = omega_max;
    }

    constexpr double kImagTol = 1e-9;
    double omega_min = 0.0, omega_max = 0.0;
    bool any = false;
    for (const auto& ev : out.eigenvalues) {
        if (std::fabs(ev.imag()) > kImagTol)
            continue;
        double re = ev.real();
        if (!any) {
            omega_min = omega_max = re;
            any = true;
        } else {
            omega_min = std::min(omega_min, re);
            omega_max = std::max(omega_max, re);
        }
    }
    if (!any)
        throw std::runtime_error("weight_eigenvalues: no real eigenvalues found");
    if (!(omega_min < 0.0) || !(omega_max > 0.0))
        throw std::runtime_error("weight_eigenvalues: spectrum does not straddle zero; "
                                 "autoregressive bounds undefined");
    out.bounds.lower = 1.0 / omega_min;
    out.bounds.upper = 1.0 / omega_max;
    return out;
}

double WeightEigen::log_det(double rho) const
{
    double sum = 0.0;
    for (const auto& omega : eigenvalues) {
        std::complex<double> term = 1.0 - rho * omega;
        double mag = std::abs(term);
        if (mag <= 0.0)
            return -std::numeric_limits<double>::infinity();
        sum += std::log(mag);
    }
    return sum;
}

RhoBounds rho_bounds(const WeightMatrix& w)
{
    if (!w.row_standardized)
        throw std::runtime_error("rho_bounds: weights must be row-standardized");
    return weight_eigenvalues(w).bounds;
}

std::string to_gal(const WeightMatrix& w)
{
    std::ostringstream out;
    out << w.n << '\n';
    for (std::size_t i = 0; i < w.n; ++i) {
        out << (i + 1) << ' ' << w.rows[i].size() << '\n';
        for (std::size_t k = 0; k < w.rows[i].size(); ++k) {
            if (k)
                out << ' ';
            out << (w.rows[i][k].col + 1);
        }
        out << '\n';
    }
    return out.str();
}

WeightMatrix from_gal(std::string_view text)
{
    std::istringstream in{std::string(text)};
    std::size_t n = 0;
    if (!(in >> n))
        throw std::runtime_error("gal: missing header");
    WeightMatrix w;
    w.n = n;
    w.rows.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        std::size_t id = 0, degree = 0;
        if (!(in >> id >> degree))
            throw std::runtime_error("gal: truncated record " + std::to_string(r + 1));
        if (id < 1 || id > n)
            throw std::runtime_error("gal: id out of range: " + std::to_string(id));
        for (std::size_t k = 0; k < degree; ++k) {
            std::size_t j = 0;
            if (!(in >> j) || j < 1 || j > n)
                throw std::runtime_error("gal: bad neighbor id in record " + std::to_string(id));
            w.rows[id - 1].push_back({std::uint32_t(j - 1), 1.0});
        }
        std::sort(w.rows[id - 1].begin(), w.rows[id - 1].end(),
                  [](const auto& a, const auto& b) { return a.col < b.col; });
    }
    w.validate();
    return w;
}

} // namespace spatecon
