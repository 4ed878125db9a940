#ifndef PCURV_IO_HPP
#define PCURV_IO_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pcurv/connection.hpp"
#include "pcurv/monodromy.hpp"

namespace pcurv {

inline constexpr const char* kToolkitVersion = "0.1.0";

struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct schema_version_error : parse_error {
    using parse_error::parse_error;
};
struct cache_corrupt : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using json = nlohmann::json;

// ---- operator files ---------------------------------------------------------

enum class RingTag { rational_laurent_t, biseries_qt };

struct OperatorDoc {
    std::string name;
    std::string description;
    std::string oracle;
    RingTag ring = RingTag::rational_laurent_t;
    std::optional<Connection<LaurentQ>> laurent;
    std::optional<Connection<BiQ>> biseries;

    const Connection<BiQ>& as_biseries() const {
        if (!biseries) throw parse_error("operator '" + name + "' is not a bi-series connection");
        return *biseries;
    }
    const Connection<LaurentQ>& as_laurent() const {
        if (!laurent) throw parse_error("operator '" + name + "' is not a Laurent connection");
        return *laurent;
    }
};

OperatorDoc parse_operator(const std::string& text);
OperatorDoc load_operator(const std::filesystem::path& path);

json operator_to_json(const Connection<LaurentQ>& c, const std::string& name,
                      const std::string& description, const std::string& oracle);
json operator_to_json(const Connection<BiQ>& c, const std::string& name,
                      const std::string& description, const std::string& oracle);
json operator_to_json(const OperatorDoc& doc);

// canonical bytes: sorted keys, fixed indentation
std::string canonical_dump(const json& j);

// ---- scenario files ---------------------------------------------------------

enum class MonodromyMode { single, congruence, order_propagation };

struct CheckParams {
    long long primes_max = 50;
};

struct ReduceParams {
    long q_order = 8;
    std::vector<long long> check_primes{5, 7};
};

struct MonodromyParams {
    LoopSpec loop;
    long k_max = 24;
    double tolerance = 1e-6;
    double step_fraction = 1.0 / 3.0;
    MonodromyMode mode = MonodromyMode::single;
    std::vector<double> q_samples;
    std::string operator2;  // congruence partner, path relative to scenario
    long congruence_order = 1;
    double slope_tolerance = 0.1;
};

struct ScenarioDoc {
    std::string name;
    std::string command;  // check | reduce | monodromy
    std::string operator_path;
    CheckParams check;
    ReduceParams reduce;
    MonodromyParams monodromy;
    std::filesystem::path base_dir;  // directory the scenario was loaded from
};

ScenarioDoc parse_scenario(const std::string& text);
ScenarioDoc load_scenario(const std::filesystem::path& path);
json scenario_to_json(const ScenarioDoc& s);

// ---- result records and the cache --------------------------------------------

struct ResultRecord {
    std::string content_hash;
    std::string toolkit_version = kToolkitVersion;
    std::string command;
    std::string operator_name;
    std::string scenario_name;
    json payload;
    int exit_code = 0;
    std::string created_at;
};

std::string content_hash(const std::string& toolkit_version, const std::string& command,
                         const json& operator_json, const json& params_json);

struct CacheConfig {
    std::filesystem::path dir;
    bool enabled = true;
};

std::optional<ResultRecord> cache_lookup(const CacheConfig& cfg, const std::string& hash);
void cache_store(const CacheConfig& cfg, const ResultRecord& rec);

// fixed 12-digit scientific rendering for floats that enter payloads
std::string render_double(double x);

// ---- corpus builders ----------------------------------------------------------

// Companion of the hypergeometric operator in the coordinate x = q t, where
// the finite singular point sits outside the unit annulus and the entries
// expand as bi-series with q-adic decay.
Connection<BiQ> hypergeometric_companion(const Rat& a, const Rat& b, const Rat& c, long q_trunc);

// 2F1(a, b; c) coefficients u_k = (a)_k (b)_k / ((c)_k k!)
std::vector<Rat> hypergeometric_coefficients(const Rat& a, const Rat& b, const Rat& c, long count);

// the flat column (-(D u) - f1 u, u) of a rank-2 companion annihilated by u
std::vector<BiQ> companion_flat_vector(const Connection<BiQ>& conn, const BiQ& u);

}  // namespace pcurv

#endif
