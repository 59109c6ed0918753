#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "shdoa/shdoa_c.h"

namespace {

std::string write_tmp(const std::string& name, const std::string& text) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << text;
  return path.string();
}

const char* kErankConfig = R"(
seed = 5
[array]
type = "equiangular_13"
mics = 13
radius = 0.06
[estimator]
order = 6
[erank]
study = "rotation"
order = 6
frequency = 2000.0
alpha = [0, 45]
)";

}  // namespace

TEST_CASE("c api: version and load/validate/free") {
  CHECK(std::strlen(shdoa_version()) > 0);

  std::string path = write_tmp("capi_ok.toml", kErankConfig);
  shdoa_config* cfg = nullptr;
  REQUIRE(shdoa_config_load(path.c_str(), &cfg) == SHDOA_OK);
  REQUIRE(cfg != nullptr);
  char warnings[512] = {0};
  CHECK(shdoa_config_validate(cfg, warnings, sizeof(warnings)) == SHDOA_OK);
  shdoa_config_free(cfg);
  std::filesystem::remove(path);
}

TEST_CASE("c api: error codes and messages") {
  shdoa_config* cfg = nullptr;
  CHECK(shdoa_config_load("/nonexistent/nowhere.toml", &cfg) == SHDOA_ERR_RUNTIME);
  CHECK(std::strlen(shdoa_last_error()) > 0);

  std::string bad = write_tmp("capi_bad.toml", "[estimator]\nmethod = \"bogus\"\n");
  CHECK(shdoa_config_load(bad.c_str(), &cfg) == SHDOA_ERR_VALIDATION);
  std::filesystem::remove(bad);

  std::string invalid = write_tmp("capi_invalid.toml", R"(
[estimator]
order = 3
sources_count = 16
)");
  REQUIRE(shdoa_config_load(invalid.c_str(), &cfg) == SHDOA_OK);
  CHECK(shdoa_config_validate(cfg, nullptr, 0) == SHDOA_ERR_VALIDATION);
  CHECK(std::string(shdoa_last_error()).find("sources_count") != std::string::npos);
  shdoa_config_free(cfg);
  std::filesystem::remove(invalid);
}

TEST_CASE("c api: overrides and an erank run end to end") {
  std::string path = write_tmp("capi_run.toml", kErankConfig);
  shdoa_config* cfg = nullptr;
  REQUIRE(shdoa_config_load(path.c_str(), &cfg) == SHDOA_OK);
  CHECK(shdoa_config_set(cfg, "seed", "123") == SHDOA_OK);
  CHECK(shdoa_config_set(cfg, "nope", "1") == SHDOA_ERR_VALIDATION);

  auto out = std::filesystem::temp_directory_path() / "shdoa_capi_out";
  std::filesystem::remove_all(out);
  REQUIRE(shdoa_run_erank(cfg, out.string().c_str()) == SHDOA_OK);
  std::ifstream json(out / "erank.json");
  REQUIRE(json.good());
  std::string text((std::istreambuf_iterator<char>(json)), std::istreambuf_iterator<char>());
  CHECK(text.find("\"schema_version\"") != std::string::npos);
  CHECK(text.find("effective_rank") != std::string::npos);
  shdoa_config_free(cfg);
  std::filesystem::remove(path);
  std::filesystem::remove_all(out);
}
