#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "cyvortex/cyvortex.h"

namespace fs = std::filesystem;

namespace {

std::string small_config(const std::string& vortices, const fs::path& out) {
  return R"({"grid": {"T": 6, "n_t": 97, "n_theta": 48}, "vortices": )" + vortices +
         R"(, "outputs": {"out_dir": ")" + out.generic_string() + R"("}})";
}

}  // namespace

TEST_CASE("version and status strings") {
  CHECK(std::string(cyv_version()) == "1.0.0");
  CHECK(std::string(cyv_status_string(CYV_OK)) == "ok");
  CHECK(std::strlen(cyv_status_string(CYV_ERR_RESOLUTION)) > 0);
}

TEST_CASE("null arguments are rejected with a message") {
  CHECK(cyv_config_from_json(nullptr, nullptr) == CYV_ERR_INVALID_ARGUMENT);
  CHECK(std::strlen(cyv_last_error()) > 0);
  cyv_solution* s = nullptr;
  CHECK(cyv_solve(nullptr, &s) == CYV_ERR_INVALID_ARGUMENT);
  CHECK(s == nullptr);
  CHECK(cyv_set_workers(0) == CYV_ERR_INVALID_ARGUMENT);
  cyv_config_free(nullptr);
  cyv_solution_free(nullptr);
  cyv_report_free(nullptr);
}

TEST_CASE("config errors surface as CYV_ERR_CONFIG") {
  cyv_config* c = nullptr;
  CHECK(cyv_config_from_json(R"({"grid": {"n_t": "x"}})", &c) == CYV_ERR_CONFIG);
  CHECK(c == nullptr);
  CHECK(std::string(cyv_last_error()).find("n_t") != std::string::npos);
  CHECK(cyv_config_from_file("/nonexistent/run.json", &c) == CYV_ERR_CONFIG);
}

TEST_CASE("solve a single vortex through the C interface") {
  const fs::path out = fs::temp_directory_path() / "cyvortex_capi";
  cyv_config* c = nullptr;
  REQUIRE(cyv_config_from_json(small_config(R"([{"t": 0, "theta": 3.14159}])", out).c_str(), &c) == CYV_OK);
  char* resolved = nullptr;
  REQUIRE(cyv_config_resolved_json(c, &resolved) == CYV_OK);
  CHECK(std::string(resolved).find("\"n_t\": 97") != std::string::npos);
  cyv_string_free(resolved);

  cyv_solution* s = nullptr;
  REQUIRE(cyv_solve(c, &s) == CYV_OK);
  size_t nt = 0, nq = 0;
  REQUIRE(cyv_solution_shape(s, &nt, &nq) == CYV_OK);
  CHECK(nt == 97);
  CHECK(nq == 48);
  cyv_solve_stats st{};
  REQUIRE(cyv_solution_stats(s, &st) == CYV_OK);
  CHECK(st.converged == 1);
  CHECK(st.vortex_number == 1);
  CHECK(std::abs(st.flux + 2.0 * M_PI) < 1e-6);
  CHECK(std::abs(st.energy - 2.0 * M_PI) / (2.0 * M_PI) < 0.05);

  std::vector<double> w(nt * nq), ubar(nt * nq), u(nt * nq), t00(nt * nq);
  CHECK(cyv_solution_copy_field(s, CYV_FIELD_W, w.data(), w.size()) == CYV_OK);
  CHECK(cyv_solution_copy_field(s, CYV_FIELD_U, u.data(), u.size()) == CYV_OK);
  CHECK(cyv_solution_copy_field(s, CYV_FIELD_UBAR, ubar.data(), ubar.size()) == CYV_OK);
  CHECK(cyv_solution_copy_field(s, CYV_FIELD_T00, t00.data(), t00.size()) == CYV_OK);
  for (size_t k = 0; k < w.size(); ++k) {
    CHECK(w[k] == doctest::Approx(ubar[k] + u[k]).epsilon(1e-12));
    CHECK(w[k] <= 0.0);
    CHECK(t00[k] >= 0.0);
  }
  CHECK(cyv_solution_copy_field(s, CYV_FIELD_W, w.data(), w.size() - 1) == CYV_ERR_SHAPE_MISMATCH);

  size_t count = 0;
  CHECK(cyv_solution_energy_trace(s, nullptr, 0, &count) == CYV_OK);
  // Initial guess, one entry per step, and possibly the polished tail.
  CHECK(count >= static_cast<size_t>(st.iterations) + 1);
  CHECK(count <= static_cast<size_t>(st.iterations) + 2);
  std::vector<double> trace(count);
  CHECK(cyv_solution_energy_trace(s, trace.data(), trace.size(), &count) == CYV_OK);
  CHECK(trace.back() <= trace.front());
  cyv_solution_free(s);
  cyv_config_free(c);
}

TEST_CASE("an unconverged solve still yields a handle") {
  cyv_config* c = nullptr;
  const std::string text = R"({"grid": {"T": 6, "n_t": 97, "n_theta": 48}, "vortices": [{"t": 0, "theta": 1}],
                               "solver": {"max_newton": 1}})";
  REQUIRE(cyv_config_from_json(text.c_str(), &c) == CYV_OK);
  cyv_solution* s = nullptr;
  REQUIRE(cyv_solve(c, &s) == CYV_OK);
  cyv_solve_stats st{};
  cyv_solution_stats(s, &st);
  CHECK(st.converged == 0);
  CHECK(st.flux == 0.0);
  std::vector<double> buf(97 * 48);
  CHECK(cyv_solution_copy_field(s, CYV_FIELD_PHI_SQ, buf.data(), buf.size()) == CYV_ERR_NOT_CONVERGED);
  CHECK(cyv_solution_copy_field(s, CYV_FIELD_U, buf.data(), buf.size()) == CYV_OK);
  cyv_solution_free(s);
  cyv_config_free(c);
}

TEST_CASE("resolution problems are reported by cyv_solve") {
  cyv_config* c = nullptr;
  REQUIRE(cyv_config_from_json(R"({"grid": {"T": 6, "n_t": 97, "n_theta": 48}, "vortices": [{"t": 5.99, "theta": 1}]})",
                               &c) == CYV_OK);
  cyv_solution* s = nullptr;
  CHECK(cyv_solve(c, &s) == CYV_ERR_RESOLUTION);
  CHECK(std::string(cyv_last_error()).find("boundary clearance") != std::string::npos);
  cyv_config_free(c);
}

TEST_CASE("run reports carry exit codes and summaries") {
  const fs::path out = fs::temp_directory_path() / "cyvortex_capi_run";
  cyv_config* c = nullptr;
  REQUIRE(cyv_config_from_json(small_config("[]", out).c_str(), &c) == CYV_OK);
  cyv_report* r = nullptr;
  REQUIRE(cyv_run("verify", c, &r) == CYV_OK);
  CHECK(cyv_report_exit_code(r) == 0);
  CHECK(std::string(cyv_report_summary_json(r)).find("\"all_pass\": true") != std::string::npos);
  cyv_report_free(r);
  REQUIRE(cyv_run("bogus", c, &r) == CYV_OK);
  CHECK(cyv_report_exit_code(r) == 2);
  CHECK(std::strlen(cyv_report_message(r)) > 0);
  cyv_report_free(r);
  CHECK(cyv_run(nullptr, c, &r) == CYV_ERR_INVALID_ARGUMENT);
  cyv_config_free(c);
}

TEST_CASE("outputs do not depend on the worker count") {
  std::string first;
  for (int workers : {1, 4}) {
    REQUIRE(cyv_set_workers(workers) == CYV_OK);
    const fs::path out = fs::temp_directory_path() / ("cyvortex_capi_workers" + std::to_string(workers));
    cyv_config* c = nullptr;
    REQUIRE(cyv_config_from_json(small_config(R"([{"t": 0.4, "theta": 2}])", out).c_str(), &c) == CYV_OK);
    cyv_solution* s = nullptr;
    REQUIRE(cyv_solve(c, &s) == CYV_OK);
    std::vector<double> w(97 * 48);
    cyv_solution_copy_field(s, CYV_FIELD_W, w.data(), w.size());
    const std::string bytes(reinterpret_cast<const char*>(w.data()), w.size() * sizeof(double));
    if (first.empty()) first = bytes;
    else CHECK(bytes == first);
    cyv_solution_free(s);
    cyv_config_free(c);
  }
  cyv_set_workers(1);
}
