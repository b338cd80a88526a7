// Regenerates the synthetic fixtures under data/fixtures. The generated
// files are committed; rerun this only when the fixture design changes.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <armadillo>

#include "spatecon/csv.hpp"
#include "spatecon/dataset.hpp"
#include "spatecon/weights.hpp"

using namespace spatecon;
namespace fs = std::filesystem;

namespace {

std::string lattice_geojson(int side, int fips_base)
{
    std::ostringstream out;
    out << "{\"type\":\"FeatureCollection\",\"features\":[";
    bool first = true;
    for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
            if (!first)
                out << ',';
            first = false;
            int id = fips_base + r * side + c;
            double x = c, y = r;
            out << "{\"type\":\"Feature\",\"properties\":{\"FIPS\":\"" << id
                << "\"},\"geometry\":{\"type\":\"Polygon\",\"coordinates\":[[";
            out << '[' << x << ',' << y << "],";
            out << '[' << x + 1 << ',' << y << "],";
            out << '[' << x + 1 << ',' << y + 1 << "],";
            out << '[' << x << ',' << y + 1 << "],";
            out << '[' << x << ',' << y << "]]]}}";
        }
    }
    out << "]}";
    return out.str();
}

void write(const fs::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    out << content;
    std::cout << "wrote " << path.string() << " (" << content.size() << " bytes)\n";
}

SpatialDataset lattice_dataset(int side, int fips_base)
{
    std::string geo = lattice_geojson(side, fips_base);
    std::ostringstream csv;
    csv << "FIPS\n";
    for (int i = 0; i < side * side; ++i)
        csv << (fips_base + i) << '\n';
    return load_dataset(geo, csv.str(), "FIPS");
}

} // namespace

int main(int argc, char** argv)
{
    fs::path dir = argc > 1 ? argv[1] : "data/fixtures";
    fs::create_directories(dir);

    std::mt19937_64 rng(1867452301u);
    std::normal_distribution<double> normal(0.0, 1.0);

    // ------------------------------------------------------------------
    // 10x10 lattice: global-model fixtures
    const int side = 10;
    const int n = side * side;
    const int fips_base = 10001;
    write(dir / "lattice10.geojson", lattice_geojson(side, fips_base));

    SpatialDataset ds = lattice_dataset(side, fips_base);
    WeightMatrix w = row_standardize(contiguity_weights(ds, WeightKind::Rook));
    arma::mat wd = w.dense();

    arma::vec x1(n), x2(n), noise1(n), noise2(n), pop(n);
    for (int i = 0; i < n; ++i) {
        x1(i) = normal(rng);
        x2(i) = normal(rng);
        noise1(i) = normal(rng);
        noise2(i) = normal(rng);
        pop(i) = 5000.0 + 1000.0 * std::fabs(normal(rng));
    }
    arma::vec eps_rho(n), eps_lam(n), eps_iid(n);
    for (int i = 0; i < n; ++i) {
        eps_rho(i) = normal(rng);
        eps_lam(i) = normal(rng);
        eps_iid(i) = normal(rng);
    }

    const double rho = 0.5, lambda = 0.6;
    arma::vec xb = 1.0 + 2.0 * x1 + 1.0 * x2;
    arma::mat eye(n, n, arma::fill::eye);
    arma::vec y_rho = arma::solve(eye - rho * wd, xb + eps_rho);
    arma::vec y_lam = xb + arma::solve(eye - lambda * wd, eps_lam);
    arma::vec y_iid = xb + eps_iid;

    {
        CsvWriter csv;
        csv.cell("FIPS").cell("X1").cell("X2").cell("NOISE1").cell("NOISE2")
            .cell("YRHO").cell("YLAM").cell("YIID").cell("POP").endrow();
        for (int i = 0; i < n; ++i) {
            csv.cell(std::to_string(fips_base + i))
                .cell(x1(i)).cell(x2(i)).cell(noise1(i)).cell(noise2(i))
                .cell(y_rho(i)).cell(y_lam(i)).cell(y_iid(i)).cell(pop(i))
                .endrow();
        }
        write(dir / "lattice10_attrs.csv", csv.str());
    }

    // daily cases, long format, March through July 2020; monthly totals
    // scale with the lattice covariates so the dynamic fits have signal
    {
        CsvWriter csv;
        csv.cell("fips").cell("date").cell("count").endrow();
        for (int i = 0; i < n; ++i) {
            double base = 20.0 + 6.0 * x1(i) + 3.0 * x2(i) + eps_iid(i);
            Date d{2020, 3, 1};
            Date stop{2020, 8, 1};
            int month_index = 0;
            int prev_month = d.month;
            while (d < stop) {
                if (d.month != prev_month) {
                    ++month_index;
                    prev_month = d.month;
                }
                double level = std::max(0.0, base * (1.0 + 0.35 * month_index));
                double wiggle = 1.0 + 0.2 * std::sin(0.4 * d.day + 0.3 * i);
                double count = std::max(0.0, level * wiggle / 30.0);
                csv.cell(std::to_string(fips_base + i)).cell(d.iso()).cell(count).endrow();
                d = d.next_day();
            }
        }
        write(dir / "lattice10_cases.csv", csv.str());
    }

    // ------------------------------------------------------------------
    // 15x15 lattice: mixed-smoothness local-model fixture
    const int side2 = 15;
    const int n2 = side2 * side2;
    const int fips_base2 = 20001;
    write(dir / "grid15.geojson", lattice_geojson(side2, fips_base2));

    {
        CsvWriter csv;
        csv.cell("FIPS").cell("XC").cell("XV").cell("YMIX").endrow();
        for (int r = 0; r < side2; ++r) {
            for (int c = 0; c < side2; ++c) {
                int i = r * side2 + c;
                double u = (c + 0.5) / side2, v = (r + 0.5) / side2;
                double xc = normal(rng);
                double xv = normal(rng);
                double beta0 = 1.0 + (u + v) / 2.0;
                double beta_c = 3.0; // spatially constant
                double beta_v = 2.0 * std::sin(3.0 * M_PI * u) * std::cos(3.0 * M_PI * v);
                double y = beta0 + beta_c * xc + beta_v * xv + 0.2 * normal(rng);
                csv.cell(std::to_string(fips_base2 + i)).cell(xc).cell(xv).cell(y).endrow();
            }
        }
        write(dir / "grid15_attrs.csv", csv.str());
    }

    std::cout << "fixtures regenerated under " << dir.string() << '\n';
    return 0;
}
