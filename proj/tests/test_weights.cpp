#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "spatecon/weights.hpp"

using namespace spatecon;

namespace {

SpatialDataset grid_dataset(int side, double jitter = 0.0, unsigned seed = 0)
{
    std::ostringstream geo, csv;
    std::mt19937_64 rng(seed);
    auto j = [&]() { return jitter > 0.0 ? (double(rng() % 2000) / 1000.0 - 1.0) * jitter : 0.0; };
    geo << "{\"type\":\"FeatureCollection\",\"features\":[";
    csv << "FIPS,V\n";
    for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
            int id = 10001 + r * side + c;
            if (r || c)
                geo << ',';
            double x = c + j(), y = r + j();
            geo << "{\"type\":\"Feature\",\"properties\":{\"FIPS\":\"" << id
                << "\"},\"geometry\":{\"type\":\"Polygon\",\"coordinates\":[["
                << '[' << x << ',' << y << "],[" << x + 1 << ',' << y << "],[" << x + 1 << ','
                << y + 1 << "],[" << x << ',' << y + 1 << "],[" << x << ',' << y << "]]]}}";
            csv << id << ",1\n";
        }
    }
    geo << "]}";
    return load_dataset(geo.str(), csv.str(), "FIPS");
}

SpatialDataset points_dataset(const std::vector<std::pair<double, double>>& centers)
{
    // tiny squares so centroids sit at the given centers
    std::ostringstream geo, csv;
    geo << "{\"type\":\"FeatureCollection\",\"features\":[";
    csv << "FIPS,V\n";
    for (std::size_t i = 0; i < centers.size(); ++i) {
        if (i)
            geo << ',';
        double x = centers[i].first - 0.001, y = centers[i].second - 0.001;
        int id = 20001 + int(i);
        geo << "{\"type\":\"Feature\",\"properties\":{\"FIPS\":\"" << id
            << "\"},\"geometry\":{\"type\":\"Polygon\",\"coordinates\":[["
            << '[' << x << ',' << y << "],[" << x + 0.002 << ',' << y << "],[" << x + 0.002 << ','
            << y + 0.002 << "],[" << x << ',' << y + 0.002 << "],[" << x << ',' << y << "]]]}}";
        csv << id << ",1\n";
    }
    geo << "]}";
    return load_dataset(geo.str(), csv.str(), "FIPS");
}

} // namespace

TEST_CASE("contiguity on a 2x2 grid: rook shares edges, queen adds the corner")
{
    SpatialDataset ds = grid_dataset(2);
    WeightMatrix rook = contiguity_weights(ds, WeightKind::Rook);
    WeightMatrix queen = contiguity_weights(ds, WeightKind::Queen);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(rook.degree(i) == 2);
        CHECK(queen.degree(i) == 3);
    }
}

TEST_CASE("contiguity on a 3x3 grid: center has 4 rook / 8 queen neighbors")
{
    SpatialDataset ds = grid_dataset(3);
    WeightMatrix rook = contiguity_weights(ds, WeightKind::Rook);
    WeightMatrix queen = contiguity_weights(ds, WeightKind::Queen);
    CHECK(rook.degree(4) == 4);
    CHECK(queen.degree(4) == 8);
}

TEST_CASE("disjoint squares are islands")
{
    SpatialDataset ds = points_dataset({{0.0, 0.0}, {10.0, 10.0}});
    WeightMatrix w = contiguity_weights(ds, WeightKind::Queen);
    CHECK(w.islands().size() == 2);
}

TEST_CASE("queen neighbors are a superset of rook neighbors")
{
    SpatialDataset ds = grid_dataset(5, 1e-10, 17); // jitter below the snap grid
    WeightMatrix rook = contiguity_weights(ds, WeightKind::Rook);
    WeightMatrix queen = contiguity_weights(ds, WeightKind::Queen);
    for (std::size_t i = 0; i < ds.n(); ++i) {
        for (const auto& e : rook.rows[i]) {
            bool found = std::any_of(queen.rows[i].begin(), queen.rows[i].end(),
                                     [&](const auto& q) { return q.col == e.col; });
            CHECK(found);
        }
    }
}

TEST_CASE("contiguity is invariant under feature reordering")
{
    SpatialDataset ds = grid_dataset(4);
    // reversed order
    std::vector<std::uint32_t> perm(ds.n());
    for (std::size_t i = 0; i < ds.n(); ++i)
        perm[i] = std::uint32_t(ds.n() - 1 - i);
    SpatialDataset reversed = subset_dataset(ds, perm);
    WeightMatrix w1 = contiguity_weights(ds, WeightKind::Queen);
    WeightMatrix w2 = contiguity_weights(reversed, WeightKind::Queen);
    for (std::size_t i = 0; i < ds.n(); ++i) {
        std::size_t ri = ds.n() - 1 - i;
        REQUIRE(w1.degree(i) == w2.degree(ri));
        std::vector<std::uint32_t> a, b;
        for (const auto& e : w1.rows[i])
            a.push_back(e.col);
        for (const auto& e : w2.rows[ri])
            b.push_back(std::uint32_t(ds.n() - 1 - e.col));
        std::sort(b.begin(), b.end());
        CHECK(a == b);
    }
}

TEST_CASE("distance band under different metrics")
{
    SpatialDataset ds = points_dataset({{0, 0}, {3, 4}});
    WeightMatrix euclid = distance_band_weights(ds, DistanceMetric::Euclidean, 6.0, 0);
    CHECK(euclid.degree(0) == 1); // d = 5
    WeightMatrix manhattan = distance_band_weights(ds, DistanceMetric::Manhattan, 6.0, 0);
    CHECK(manhattan.degree(0) == 0); // d = 7
    CHECK(manhattan.islands().size() == 2);
}

TEST_CASE("threshold beyond the max distance gives the complete graph")
{
    SpatialDataset ds = points_dataset({{0, 0}, {1, 0}, {2, 1}, {4, 4}});
    WeightMatrix w = distance_band_weights(ds, DistanceMetric::Euclidean, 100.0);
    for (std::size_t i = 0; i < ds.n(); ++i)
        CHECK(w.degree(i) == ds.n() - 1);
}

TEST_CASE("min_neighbors guarantees a minimum degree")
{
    SpatialDataset ds = points_dataset({{0, 0}, {0.5, 0}, {1, 0}, {30, 30}, {40, 40}});
    for (int k = 1; k <= 3; ++k) {
        WeightMatrix w =
            distance_band_weights(ds, DistanceMetric::Euclidean, 2.0, k);
        for (std::size_t i = 0; i < ds.n(); ++i)
            CHECK(w.degree(i) >= std::size_t(k));
    }
}

TEST_CASE("arc distance covers a quarter meridian")
{
    // (0,0) -> (0,90): pi/2 * R
    double d = point_distance({0.0, 0.0}, {0.0, 90.0}, DistanceMetric::Arc);
    CHECK(d == doctest::Approx(M_PI / 2.0 * 6371.0088).epsilon(1e-9));
    CHECK(d == doctest::Approx(10007.543).epsilon(1e-4));
}

TEST_CASE("row standardization")
{
    SpatialDataset ds = grid_dataset(3);
    WeightMatrix w = contiguity_weights(ds, WeightKind::Rook);
    WeightMatrix std_w = row_standardize(w);
    for (std::size_t i = 0; i < std_w.n; ++i)
        CHECK(std_w.row_sum(i) == doctest::Approx(1.0).epsilon(1e-12));
    // sparsity pattern unchanged
    for (std::size_t i = 0; i < w.n; ++i) {
        REQUIRE(w.degree(i) == std_w.degree(i));
        for (std::size_t k = 0; k < w.rows[i].size(); ++k)
            CHECK(w.rows[i][k].col == std_w.rows[i][k].col);
    }
    CHECK_THROWS(row_standardize(std_w));

    // hand-checked small rows
    WeightMatrix tiny;
    tiny.n = 3;
    tiny.rows = {{{1, 1.0}, {2, 1.0}}, {{0, 1.0}}, {}};
    WeightMatrix tiny_std = row_standardize(tiny);
    CHECK(tiny_std.rows[0][0].weight == doctest::Approx(0.5));
    CHECK(tiny_std.rows[0][1].weight == doctest::Approx(0.5));
    CHECK(tiny_std.rows[1][0].weight == doctest::Approx(1.0));
    CHECK(tiny_std.rows[2].empty());
}

TEST_CASE("rho bounds for a standardized matrix")
{
    SpatialDataset ds = grid_dataset(4);
    WeightMatrix w = row_standardize(contiguity_weights(ds, WeightKind::Rook));
    RhoBounds bounds = rho_bounds(w);
    CHECK(bounds.upper == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(bounds.lower < 0.0);

    // mutual pair: eigenvalues +-1
    WeightMatrix pair;
    pair.n = 2;
    pair.rows = {{{1, 1.0}}, {{0, 1.0}}};
    pair.row_standardized = true;
    RhoBounds pb = rho_bounds(pair);
    CHECK(pb.lower == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(pb.upper == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS(rho_bounds(contiguity_weights(ds, WeightKind::Rook))); // not standardized
}

TEST_CASE("rho bounds match a symmetric eigensolver oracle on the 20x20 lattice")
{
    SpatialDataset ds = grid_dataset(20);
    WeightMatrix w0 = contiguity_weights(ds, WeightKind::Rook);
    WeightMatrix w = row_standardize(w0);

    // oracle: eigenvalues of D^{-1/2} A D^{-1/2} equal those of D^{-1} A
    arma::mat a = w0.dense();
    arma::vec deg = arma::sum(a, 1);
    arma::mat dinv_sqrt = arma::diagmat(1.0 / arma::sqrt(deg));
    arma::vec sym_eigs;
    REQUIRE(arma::eig_sym(sym_eigs, dinv_sqrt * a * dinv_sqrt));

    RhoBounds bounds = rho_bounds(w);
    CHECK(bounds.lower == doctest::Approx(1.0 / sym_eigs.min()).epsilon(1e-8));
    CHECK(bounds.upper == doctest::Approx(1.0 / sym_eigs.max()).epsilon(1e-8));
}

TEST_CASE("iterative extreme-eigenvalue path agrees with the bipartite lattice spectrum")
{
    // above the dense cutoff the bounds come from power iteration; a rook
    // lattice is bipartite, so the standardized spectrum is exactly [-1, 1]
    const int side = 72; // n = 5184 > dense cutoff
    WeightMatrix w;
    w.n = std::size_t(side) * std::size_t(side);
    w.rows.resize(w.n);
    auto id = [side](int r, int c) { return std::uint32_t(r * side + c); };
    for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c) {
            auto& row = w.rows[id(r, c)];
            if (r > 0)
                row.push_back({id(r - 1, c), 1.0});
            if (c > 0)
                row.push_back({id(r, c - 1), 1.0});
            if (c + 1 < side)
                row.push_back({id(r, c + 1), 1.0});
            if (r + 1 < side)
                row.push_back({id(r + 1, c), 1.0});
        }
    WeightMatrix std_w = row_standardize(w);
    RhoBounds bounds = rho_bounds(std_w);
    // estimation path: edge eigenvalue gaps are O(1/n) and the iteration
    // error is first order, so expect estimator accuracy, not eigensolver
    // accuracy
    CHECK(bounds.upper == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(bounds.lower == doctest::Approx(-1.0).epsilon(1e-3));
}

TEST_CASE("log determinant from eigenvalues matches the dense determinant")
{
    SpatialDataset ds = grid_dataset(5);
    WeightMatrix w = row_standardize(contiguity_weights(ds, WeightKind::Queen));
    WeightEigen eig = weight_eigenvalues(w);
    arma::mat dense = w.dense();
    for (double rho : {-0.8, -0.3, 0.0, 0.4, 0.9}) {
        arma::mat m = arma::eye(w.n, w.n) - rho * dense;
        double val, sign;
        arma::log_det(val, sign, m);
        CHECK(eig.log_det(rho) == doctest::Approx(val).epsilon(1e-10));
    }
}

TEST_CASE("sparse products agree with dense linear algebra")
{
    SpatialDataset ds = grid_dataset(6);
    WeightMatrix w = row_standardize(contiguity_weights(ds, WeightKind::Queen));
    arma::mat dense = w.dense();
    std::mt19937_64 rng(5);
    arma::vec x(w.n);
    for (auto& v : x)
        v = double(rng() % 1000) / 500.0 - 1.0;
    CHECK(arma::norm(w.spmv(x) - dense * x) < 1e-12);
    CHECK(arma::norm(w.spmv_transpose(x) - dense.t() * x) < 1e-12);

    arma::mat m(w.n, 3, arma::fill::randu);
    CHECK(arma::norm(w.spmm(m) - dense * m, "fro") < 1e-12);

    double s0, s1, s2;
    w.moment_sums(s0, s1, s2);
    double s0_oracle = arma::accu(dense);
    arma::mat pair = dense + dense.t();
    double s1_oracle = 0.5 * arma::accu(pair % pair);
    arma::vec row_sums = arma::sum(dense, 1);
    arma::vec col_sums = arma::sum(dense, 0).t();
    double s2_oracle = arma::accu(arma::square(row_sums + col_sums));
    CHECK(s0 == doctest::Approx(s0_oracle).epsilon(1e-12));
    CHECK(s1 == doctest::Approx(s1_oracle).epsilon(1e-12));
    CHECK(s2 == doctest::Approx(s2_oracle).epsilon(1e-12));
}

TEST_CASE("gal export and import round trip")
{
    SpatialDataset ds = grid_dataset(4);
    WeightMatrix w = contiguity_weights(ds, WeightKind::Queen);
    WeightMatrix back = from_gal(to_gal(w));
    REQUIRE(back.n == w.n);
    for (std::size_t i = 0; i < w.n; ++i) {
        REQUIRE(back.degree(i) == w.degree(i));
        for (std::size_t k = 0; k < w.rows[i].size(); ++k)
            CHECK(back.rows[i][k].col == w.rows[i][k].col);
    }
    CHECK_THROWS(from_gal("not a gal"));
}

TEST_CASE("distance band construction is identical across exec modes")
{
    SpatialDataset ds = grid_dataset(7);
    ExecSpec serial{Exec::Serial, 1};
    ExecSpec omp{Exec::OpenMP, 4};
    WeightMatrix a = distance_band_weights(ds, DistanceMetric::Euclidean, 1.5, 1, serial);
    WeightMatrix b = distance_band_weights(ds, DistanceMetric::Euclidean, 1.5, 1, omp);
    REQUIRE(a.n == b.n);
    for (std::size_t i = 0; i < a.n; ++i) {
        REQUIRE(a.degree(i) == b.degree(i));
        for (std::size_t k = 0; k < a.rows[i].size(); ++k) {
            CHECK(a.rows[i][k].col == b.rows[i][k].col);
            CHECK(a.rows[i][k].weight == b.rows[i][k].weight);
        }
    }
}
