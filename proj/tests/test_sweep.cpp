#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "nlohmann/json.hpp"
#include "srmem/sweep.hpp"

using namespace srmem;
using std::numbers::pi;

namespace {

SweepPlan small_plan()
{
    SweepPlan p;
    p.axis = "d";
    p.values = {9.0, 0.0, 3.0, 20.0, -1.0};
    p.base.protocol = Protocol::sr;
    p.base.direction = Retrieval::forward;
    p.base.probe_T_P = 0.1;
    return p;
}

std::string csv_text(const SweepResult& r)
{
    std::ostringstream os;
    write_csv(os, sweep_table(r));
    return os.str();
}

}  // namespace

TEST_CASE("ranges")
{
    const auto lin = linear_range(1.0, 3.0, 5);
    CHECK(lin.size() == 5);
    CHECK(lin[2] == doctest::Approx(2.0));
    CHECK(lin.back() == 3.0);
    const auto lg = log_range(10.0, 1000.0, 3);
    CHECK(lg[1] == doctest::Approx(100.0));
    CHECK(lg.back() == doctest::Approx(1000.0));
    CHECK_THROWS_AS(log_range(0.0, 1.0, 3), Error);
}

TEST_CASE("sweep rows: sorted, empty medium and failures")
{
    const SweepResult r = run_sweep(small_plan(), 2);
    REQUIRE(r.rows.size() == 5);
    for (std::size_t i = 1; i < r.rows.size(); ++i) {
        CHECK(r.rows[i - 1].value < r.rows[i].value);
    }
    // d = -1 is rejected without aborting the sweep.
    CHECK_FALSE(r.rows[0].ok);
    CHECK_FALSE(r.rows[0].error.empty());
    CHECK(r.rows[1].ok);
    CHECK(r.rows[1].value == 0.0);
    CHECK(r.rows[1].objective == 0.0);
    CHECK(r.rows[2].objective < r.rows[3].objective);
    CHECK(r.rows[3].objective < r.rows[4].objective);
}

TEST_CASE("sweep results do not depend on the worker count")
{
    const std::string one = csv_text(run_sweep(small_plan(), 1));
    const std::string three = csv_text(run_sweep(small_plan(), 3));
    CHECK(one == three);
    // Evaluation order does not matter either.
    SweepPlan rev = small_plan();
    std::reverse(rev.values.begin(), rev.values.end());
    const SweepResult r = run_sweep(rev, 2);
    const SweepResult f = run_sweep(small_plan(), 2);
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        CHECK(r.rows[i].value == f.rows[i].value);
        if (r.rows[i].ok) {
            CHECK(r.rows[i].objective == f.rows[i].objective);
        }
    }
}

TEST_CASE("csv carries its manifest hash")
{
    const SweepResult r = run_sweep(small_plan(), 1);
    const std::string text = csv_text(r);
    std::istringstream in(text);
    std::string first, header;
    std::getline(in, first);
    std::getline(in, header);
    CHECK(first == "# manifest: " + r.hash);
    CHECK(header.starts_with("d,objective,eta_total"));
    CHECK(r.hash == plan_hash(small_plan()));

    Table orphan;
    orphan.columns = {"x"};
    orphan.add({1.0});
    std::ostringstream os;
    CHECK_THROWS_AS(write_csv(os, orphan), Error);

    const auto j = nlohmann::json::parse(make_manifest(r).to_json());
    CHECK(j.at("hash") == r.hash);
    CHECK(j.at("version") == version());
    CHECK(j.at("points").size() == 5);
}

TEST_CASE("cells keep full precision")
{
    CHECK(format_cell(std::nan("")) == "nan");
    const double v = 1.0 / 3.0;
    CHECK(std::stod(format_cell(v)) == v);
    CHECK(format_cell(0.25) == "2.50000000000000000e-01");
}

TEST_CASE("plan validation")
{
    SweepPlan p = small_plan();
    p.axis = "colour";
    CHECK_THROWS_AS(p.validate(), Error);
    p = small_plan();
    p.values.clear();
    CHECK_THROWS_AS(p.validate(), Error);
    p = small_plan();
    p.values.push_back(std::nan(""));
    CHECK_THROWS_AS(p.validate(), Error);
    CHECK(objective_from_string("leakage") == Objective::leakage);
}

TEST_CASE("axis setters")
{
    RunConfig base;
    base.protocol = Protocol::ats;
    CHECK_THROWS_AS(with_axis(base, "Omega", 50.0), Error);
    base.ats_window_energy = 0.99;
    const RunConfig c = with_axis(base, "Omega", 50.0);
    const auto w = energy_window(make_probe(c), 0.99);
    CHECK(c.ats_area == doctest::Approx(50.0 * (w.second - w.first)));
    const RunConfig b = with_axis(base, "B", 20.0);
    CHECK(bandwidth_fwhm(make_probe(b)) == doctest::Approx(20.0).epsilon(1e-6));
}

TEST_CASE("required depth")
{
    RunConfig base;
    base.protocol = Protocol::sr;
    base.direction = Retrieval::forward;
    const DepthResult zero = required_depth(base, 20.0, 0.0);
    CHECK(zero.reachable);
    CHECK(zero.d == 0.0);

    // Forward recall with a fast square control: the first d reaching 0.3.
    const DepthResult r = required_depth(base, 20.0, 0.3);
    REQUIRE(r.reachable);
    CHECK(r.eta >= 0.3);
    RunConfig below = base;
    below.probe_T_P = probe_duration_for_bandwidth(base, 20.0);
    below.d = r.d / 1.02;
    CHECK(run_protocol(below).eta_total < 0.3);

    const DepthResult never = required_depth(base, 20.0, 0.99, 50.0);
    CHECK_FALSE(never.reachable);
}

TEST_CASE("line fit")
{
    const LineFit f = fit_line({1.0, 2.0, 3.0, 4.0}, {2.5, 4.5, 6.5, 8.5});
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(0.5));
    CHECK(f.r_squared == doctest::Approx(1.0));
}

TEST_CASE("output directory")
{
    const auto tmp = std::filesystem::temp_directory_path() / "srmem-test-out";
    std::filesystem::remove_all(tmp);
    CHECK(output_directory(tmp.string()) == tmp.string());
    CHECK(std::filesystem::is_directory(tmp));
    std::filesystem::remove_all(tmp);
}
