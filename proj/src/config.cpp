#include "mmt/config.hpp"

#include <fstream>

#include "jsonl.hpp"

namespace mmt {

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
    std::filesystem::path p(value);
    return p.is_absolute() ? p : base / p;
}

std::string get_string(const jsonl::Json& doc, const char* key, const std::string& where) {
    return jsonl::require_string(doc, key, where);
}

int get_int(const jsonl::Json& doc, const char* key, int fallback, const std::string& where) {
    if (!doc.contains(key)) return fallback;
    if (!doc[key].is_number_integer()) {
        throw HarnessError(ErrorKind::Config, where + ": '" + key + "' must be an integer");
    }
    return doc[key].get<int>();
}

ProviderConfig parse_provider(const jsonl::Json& entry, const std::string& where) {
    ProviderConfig provider;
    provider.name = get_string(entry, "name", where);
    provider.kind = provider_kind_from_string(get_string(entry, "kind", where));
    if (entry.contains("endpoint")) provider.endpoint_url = get_string(entry, "endpoint", where);
    if (entry.contains("model")) provider.model = get_string(entry, "model", where);
    if (entry.contains("auth_env")) provider.auth_env = get_string(entry, "auth_env", where);
    provider.max_in_flight = get_int(entry, "max_in_flight", provider.max_in_flight, where);
    provider.timeout_ms = get_int(entry, "timeout_ms", provider.timeout_ms, where);
    if (entry.contains("retry")) {
        const jsonl::Json& retry = entry["retry"];
        if (!retry.is_object()) {
            throw HarnessError(ErrorKind::Config, where + ": 'retry' must be an object");
        }
        provider.retry.max_attempts =
            get_int(retry, "max_attempts", provider.retry.max_attempts, where);
        provider.retry.base_backoff_ms =
            get_int(retry, "base_backoff_ms", provider.retry.base_backoff_ms, where);
    }
    if (entry.contains("script")) provider.script = get_string(entry, "script", where);
    return provider;
}

GenerateOptions parse_generate(const jsonl::Json& doc, const std::string& where) {
    GenerateOptions options;
    if (!doc.contains("types") || !doc["types"].is_array() || doc["types"].empty()) {
        throw HarnessError(ErrorKind::Config,
                           where + ": generation settings need a nonempty 'types' array");
    }
    for (const jsonl::Json& entry : doc["types"]) {
        if (!entry.is_string()) {
            throw HarnessError(ErrorKind::Config, where + ": 'types' entries must be strings");
        }
        options.types.insert(ptype_from_string(entry.get<std::string>()));
    }
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned()) {
            throw HarnessError(ErrorKind::Config,
                               where + ": generation 'seed' must be a non-negative integer");
        }
        options.seed = doc["seed"].get<std::uint64_t>();
    }
    if (doc.contains("negation_mode")) {
        options.negation_mode =
            negation_mode_from_string(get_string(doc, "negation_mode", where));
    }
    options.multiplicity = get_int(doc, "multiplicity", options.multiplicity, where);
    return options;
}

}  // namespace

Ratio ratio_from_decimal(std::string_view text) {
    std::size_t dot = text.find('.');
    std::string_view whole = dot == std::string_view::npos ? text : text.substr(0, dot);
    std::string_view frac = dot == std::string_view::npos ? "" : text.substr(dot + 1);
    if ((whole.empty() && frac.empty()) ||
        whole.find_first_not_of("0123456789") != std::string_view::npos ||
        frac.find_first_not_of("0123456789") != std::string_view::npos || frac.size() > 9) {
        throw HarnessError(ErrorKind::Config,
                           "'" + std::string(text) + "' is not a decimal in [0, 1]");
    }
    Ratio ratio;
    for (char c : whole) ratio.num = ratio.num * 10 + (c - '0');
    for (char c : frac) {
        ratio.num = ratio.num * 10 + (c - '0');
        ratio.den *= 10;
    }
    return ratio;
}

HarnessConfig HarnessConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw HarnessError(ErrorKind::Io, "cannot open config '" + path.string() + "'");
    }
    jsonl::Json doc = jsonl::Json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw HarnessError(ErrorKind::Config, path.string() + ": not a JSON object");
    }
    const std::string where = path.string();
    const std::filesystem::path base = path.has_parent_path() ? path.parent_path() : ".";

    HarnessConfig config;
    config.dataset_path = resolve(base, get_string(doc, "dataset", where));
    if (doc.contains("suite")) {
        config.suite_path = resolve(base, get_string(doc, "suite", where));
    }
    if (doc.contains("generate")) {
        if (!doc["generate"].is_object()) {
            throw HarnessError(ErrorKind::Config, where + ": 'generate' must be an object");
        }
        config.generate = parse_generate(doc["generate"], where);
    }
    if (doc.contains("lexicon_dir")) {
        config.lexicon_dir = resolve(base, get_string(doc, "lexicon_dir", where));
    }
    config.template_dir = resolve(base, get_string(doc, "template_dir", where));
    if (doc.contains("shots")) {
        config.shots_path = resolve(base, get_string(doc, "shots", where));
    }

    if (doc.contains("styles")) {
        if (!doc["styles"].is_array() || doc["styles"].empty()) {
            throw HarnessError(ErrorKind::Config, where + ": 'styles' must be a nonempty array");
        }
        config.styles.clear();
        for (const jsonl::Json& entry : doc["styles"]) {
            if (!entry.is_string()) {
                throw HarnessError(ErrorKind::Config, where + ": style entries must be strings");
            }
            config.styles.push_back(style_from_string(entry.get<std::string>()));
        }
    }
    if (doc.contains("context_modes")) {
        if (!doc["context_modes"].is_array() || doc["context_modes"].empty()) {
            throw HarnessError(ErrorKind::Config,
                               where + ": 'context_modes' must be a nonempty array");
        }
        config.context_modes.clear();
        for (const jsonl::Json& entry : doc["context_modes"]) {
            if (!entry.is_string()) {
                throw HarnessError(ErrorKind::Config, where + ": mode entries must be strings");
            }
            config.context_modes.push_back(context_mode_from_string(entry.get<std::string>()));
        }
    }

    if (!doc.contains("providers") || !doc["providers"].is_array()) {
        throw HarnessError(ErrorKind::Config, where + ": 'providers' must be an array");
    }
    for (const jsonl::Json& entry : doc["providers"]) {
        if (!entry.is_object()) {
            throw HarnessError(ErrorKind::Config, where + ": provider entries must be objects");
        }
        config.providers.push_back(parse_provider(entry, where));
    }

    if (doc.contains("out_dir")) {
        config.out_dir = resolve(base, get_string(doc, "out_dir", where));
    } else {
        config.out_dir = base / "out";
    }

    if (doc.contains("replay")) {
        const jsonl::Json& replay = doc["replay"];
        if (!replay.is_object()) {
            throw HarnessError(ErrorKind::Config, where + ": 'replay' must be an object");
        }
        if (replay.contains("mode")) {
            config.replay.mode = replay_mode_from_string(get_string(replay, "mode", where));
        }
        if (replay.contains("store")) {
            config.replay.store = resolve(base, get_string(replay, "store", where));
        }
    }

    if (doc.contains("report")) {
        const jsonl::Json& report = doc["report"];
        if (!report.is_object()) {
            throw HarnessError(ErrorKind::Config, where + ": 'report' must be an object");
        }
        if (report.contains("formats")) {
            if (!report["formats"].is_array()) {
                throw HarnessError(ErrorKind::Config, where + ": 'formats' must be an array");
            }
            config.report.formats.clear();
            for (const jsonl::Json& entry : report["formats"]) {
                if (!entry.is_string()) {
                    throw HarnessError(ErrorKind::Config,
                                       where + ": format entries must be strings");
                }
                config.report.formats.insert(
                    report_format_from_string(entry.get<std::string>()));
            }
        }
        if (report.contains("include_failures")) {
            if (!report["include_failures"].is_boolean()) {
                throw HarnessError(ErrorKind::Config,
                                   where + ": 'include_failures' must be a boolean");
            }
            config.report.include_failures = report["include_failures"].get<bool>();
        }
        config.report.percent_precision =
            get_int(report, "percent_precision", config.report.percent_precision, where);
    }

    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned()) {
            throw HarnessError(ErrorKind::Config,
                               where + ": 'seed' must be a non-negative integer");
        }
        config.seed = doc["seed"].get<std::uint64_t>();
    }
    if (doc.contains("fail_threshold") && !doc["fail_threshold"].is_null()) {
        const jsonl::Json& threshold = doc["fail_threshold"];
        std::string text = threshold.is_string() ? threshold.get<std::string>()
                                                 : threshold.dump();
        config.fail_threshold = ratio_from_decimal(text);
    }

    config.validate();
    return config;
}

void HarnessConfig::validate() const {
    if (dataset_path.empty()) {
        throw HarnessError(ErrorKind::Config, "config names no dataset");
    }
    if (providers.empty()) {
        throw HarnessError(ErrorKind::Config, "config lists no providers");
    }
    for (const ProviderConfig& provider : providers) provider.validate();
    if (styles.empty() || context_modes.empty()) {
        throw HarnessError(ErrorKind::Config, "config needs at least one style and one mode");
    }
    if (report.formats.empty()) {
        throw HarnessError(ErrorKind::Config, "config selects no report formats");
    }
    if (report.percent_precision < 0 || report.percent_precision > 6) {
        throw HarnessError(ErrorKind::Config, "percent_precision must be between 0 and 6");
    }
    if (fail_threshold) {
        const Ratio& threshold = *fail_threshold;
        if (threshold.num < 0 || threshold.num > threshold.den) {
            throw HarnessError(ErrorKind::Config, "fail_threshold must lie in [0, 1]");
        }
    }
    if (generate) {
        for (PerturbationType ptype : generate->types) {
            if (ptype == PerturbationType::Srl || ptype == PerturbationType::Coreference) {
                throw HarnessError(ErrorKind::CuratedOnlyType,
                                   std::string("'") + to_string(ptype) +
                                       "' has no generator; provide a curated suite file");
            }
        }
        if (generate->multiplicity < 1) {
            throw HarnessError(ErrorKind::Config, "generation multiplicity must be >= 1");
        }
        if (lexicon_dir.empty()) {
            throw HarnessError(ErrorKind::Config,
                               "generation settings need a 'lexicon_dir' to draw words from");
        }
    }
}

}  // namespace mmt
