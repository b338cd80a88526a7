// Times the OpenMP kernels against their serial reference paths and checks
// that both produce identical results.
//
//   bench_kernels [threads]
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <dlfcn.h>

#include <armadillo>

#include "spatecon/dataset.hpp"
#include "spatecon/global_models.hpp"
#include "spatecon/importance.hpp"
#include "spatecon/local_models.hpp"
#include "spatecon/selection.hpp"
#include "spatecon/weights.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace spatecon;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point start)
{
    return std::chrono::duration<double>(clock_type::now() - start).count();
}

struct Row {
    std::string name;
    double serial_s;
    double omp_s;
    bool identical;
};

std::vector<Row> rows;

template <typename Fn>
void bench(const std::string& name, Fn&& run, int threads)
{
    ExecSpec serial{Exec::Serial, 1};
    ExecSpec omp{Exec::OpenMP, threads};

    run(serial); // warm caches and allocators before timing

    auto t0 = clock_type::now();
    auto serial_result = run(serial);
    double serial_s = seconds_since(t0);

    auto t1 = clock_type::now();
    auto omp_result = run(omp);
    double omp_s = seconds_since(t1);

    rows.push_back({name, serial_s, omp_s, serial_result == omp_result});
}

std::vector<LonLat> grid_coords(int side)
{
    std::vector<LonLat> coords;
    for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c)
            coords.push_back({(c + 0.5) / side, (r + 0.5) / side});
    return coords;
}

std::string digest(const arma::mat& m)
{
    // cheap order-sensitive fingerprint; bitwise equality is the point
    std::uint64_t h = 14695981039346656037ULL;
    for (arma::uword i = 0; i < m.n_elem; ++i) {
        std::uint64_t bits;
        double v = m(i);
        std::memcpy(&bits, &v, sizeof bits);
        for (int b = 0; b < 8; ++b) {
            h ^= (bits >> (8 * b)) & 0xff;
            h *= 1099511628211ULL;
        }
    }
    return std::to_string(h);
}

} // namespace

int main(int argc, char** argv)
{
    // keep the BLAS pool out of the measurements; the kernels own the
    // parallelism here
    if (auto* set_blas_threads =
            reinterpret_cast<void (*)(int)>(dlsym(RTLD_DEFAULT, "openblas_set_num_threads")))
        set_blas_threads(1);

    int threads = 0;
    if (argc > 1)
        threads = std::atoi(argv[1]);
#ifdef _OPENMP
    if (threads <= 0)
        threads = omp_get_max_threads();
#else
    threads = 1;
#endif
    std::printf("comparing serial reference vs OpenMP (%d threads)\n\n", threads);

    std::mt19937_64 rng(4711);
    std::normal_distribution<double> normal;

    // GWR: per-location weighted fits
    {
        std::vector<LonLat> coords = grid_coords(32); // n = 1024
        const std::size_t n = coords.size();
        arma::mat cols(n, 3);
        arma::vec y(n);
        for (std::size_t i = 0; i < n; ++i) {
            double u = coords[i].lon, v = coords[i].lat;
            for (std::size_t j = 0; j < 3; ++j)
                cols(i, j) = normal(rng);
            y(i) = 1.0 + (1.0 + u) * cols(i, 0) + std::sin(2.0 * M_PI * v) * cols(i, 1) +
                   0.5 * cols(i, 2) + 0.3 * normal(rng);
        }
        DesignMatrix d = DesignMatrix::from_columns({"A", "B", "C"}, cols);
        bench(
            "gwr fit (n=1024, p=3, fixed k)",
            [&](const ExecSpec& exec) {
                GwrOptions opts;
                opts.bandwidth = 120;
                opts.exec = exec;
                GwrFit fit = fit_gwr(d, y, coords, opts);
                return digest(fit.local_coefficients) + digest(arma::mat(fit.local_r2));
            },
            threads);

        bench(
            "gwr bandwidth search (n=1024)",
            [&](const ExecSpec& exec) {
                GwrOptions opts;
                opts.exec = exec;
                GwrFit fit = fit_gwr(d, y, coords, opts);
                return std::to_string(fit.bandwidth) + ":" + digest(arma::mat(fit.fitted));
            },
            threads);
    }

    // MGWR backfitting
    {
        std::vector<LonLat> coords = grid_coords(15);
        const std::size_t n = coords.size();
        arma::mat cols(n, 2);
        arma::vec y(n);
        for (std::size_t i = 0; i < n; ++i) {
            double u = coords[i].lon, v = coords[i].lat;
            cols(i, 0) = normal(rng);
            cols(i, 1) = normal(rng);
            y(i) = 1.0 + 3.0 * cols(i, 0) +
                   2.0 * std::sin(3.0 * M_PI * u) * std::cos(3.0 * M_PI * v) * cols(i, 1) +
                   0.2 * normal(rng);
        }
        DesignMatrix d = DesignMatrix::from_columns({"XC", "XV"}, cols);
        bench(
            "mgwr backfit (n=225, p=2)",
            [&](const ExecSpec& exec) {
                MgwrOptions opts;
                opts.exec = exec;
                MgwrFit fit = fit_mgwr(d, y, coords, opts);
                return digest(fit.local_coefficients) + std::to_string(fit.backfit_iterations);
            },
            threads);
    }

    // distance-band weights over all centroid pairs
    {
        std::vector<LonLat> pts;
        for (int i = 0; i < 1500; ++i)
            pts.push_back({10.0 * normal(rng), 10.0 * normal(rng)});
        // wrap into a dataset of tiny squares
        std::ostringstream geo, csv;
        geo << "{\"type\":\"FeatureCollection\",\"features\":[";
        csv << "FIPS,V\n";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i)
                geo << ',';
            double x = pts[i].lon, y2 = pts[i].lat;
            geo << "{\"type\":\"Feature\",\"properties\":{\"FIPS\":\"" << 10001 + i
                << "\"},\"geometry\":{\"type\":\"Polygon\",\"coordinates\":[[[" << x << ',' << y2
                << "],[" << x + 0.001 << ',' << y2 << "],[" << x + 0.001 << ',' << y2 + 0.001
                << "],[" << x << ',' << y2 + 0.001 << "],[" << x << ',' << y2 << "]]]}}";
            csv << 10001 + i << ",1\n";
        }
        geo << "]}";
        SpatialDataset ds = load_dataset(geo.str(), csv.str(), "FIPS");
        bench(
            "distance-band weights (n=1500)",
            [&](const ExecSpec& exec) {
                WeightMatrix w = distance_band_weights(ds, DistanceMetric::Euclidean, 1.0, 2, exec);
                std::size_t links = 0;
                for (std::size_t i = 0; i < w.n; ++i)
                    links += w.degree(i);
                return std::to_string(links);
            },
            threads);
    }

    // IDW interpolation
    {
        PointSamples samples;
        for (int i = 0; i < 600; ++i)
            samples.points.push_back({normal(rng) * 5.0, normal(rng) * 5.0, normal(rng)});
        std::vector<LonLat> targets;
        for (int i = 0; i < 20000; ++i)
            targets.push_back({normal(rng) * 5.0, normal(rng) * 5.0});
        bench(
            "idw interpolation (600 x 20000)",
            [&](const ExecSpec& exec) {
                auto values = idw_interpolate(samples, targets, 2.0, exec);
                arma::vec v(values);
                return digest(arma::mat(v));
            },
            threads);
    }

    // random forest training
    {
        const std::size_t n = 3000;
        arma::mat cols(n, 6);
        arma::vec y(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < 6; ++j)
                cols(i, j) = normal(rng);
            y(i) = 2.0 * cols(i, 0) - cols(i, 3) + 0.5 * normal(rng);
        }
        DesignMatrix d =
            DesignMatrix::from_columns({"A", "B", "C", "D", "E", "F"}, cols);
        bench(
            "random forest (n=3000, 160 trees)",
            [&](const ExecSpec& exec) {
                ForestConfig cfg;
                cfg.n_trees = 160;
                cfg.seed = 99;
                RandomForest forest = fit_forest(d, y, cfg, exec);
                arma::vec totals(6, arma::fill::zeros);
                for (const auto& tree : forest.trees)
                    totals += tree.impurity_reduction;
                return digest(arma::mat(totals));
            },
            threads);
    }

    // stepwise candidate scans
    {
        const std::size_t n = 2000;
        arma::mat cols(n, 24);
        for (auto& v : cols)
            v = normal(rng);
        arma::vec y(n);
        for (std::size_t i = 0; i < n; ++i)
            y(i) = 1.5 * cols(i, 3) - cols(i, 11) + 0.8 * cols(i, 17) + normal(rng);
        std::vector<std::string> names;
        for (int j = 0; j < 24; ++j)
            names.push_back("C" + std::to_string(j));
        DesignMatrix d = DesignMatrix::from_columns(names, cols);
        bench(
            "stepwise forward (n=2000, 24 candidates)",
            [&](const ExecSpec& exec) {
                SelectionResult result = stepwise_forward(d, y, 0.05, 10.0, exec);
                std::string out;
                for (const auto& s : result.selected)
                    out += s + ";";
                return out;
            },
            threads);
    }

    std::printf("%-42s %10s %10s %8s  %s\n", "kernel", "serial", "openmp", "speedup", "bit-identical");
    for (const auto& row : rows)
        std::printf("%-42s %9.3fs %9.3fs %7.2fx  %s\n", row.name.c_str(), row.serial_s, row.omp_s,
                    row.serial_s / row.omp_s, row.identical ? "yes" : "NO");

    bool all_identical = true;
    for (const auto& row : rows)
        all_identical = all_identical && row.identical;
    if (!all_identical) {
        std::printf("\nmismatch between serial and OpenMP results\n");
        return 1;
    }
    return 0;
}
