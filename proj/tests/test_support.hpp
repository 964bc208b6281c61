#pragma once

#include "codemorph/error.hpp"
#include "codemorph/extractor.hpp"
#include "codemorph/gateway.hpp"
#include "codemorph/manifest.hpp"
#include "codemorph/prompt.hpp"
#include "codemorph/strategies.hpp"
#include "codemorph/util.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>

namespace testsup {

namespace fs = std::filesystem;

inline fs::path data_dir() {
    return fs::path(TEST_DATA_DIR);
}

// Unique scratch directory, removed on destruction.
class TempDir {
public:
    TempDir() {
        std::string tmpl = (fs::temp_directory_path() / "codemorph-test-XXXXXX").string();
        if (!mkdtemp(tmpl.data())) {
            throw std::runtime_error("mkdtemp failed");
        }
        path_ = tmpl;
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

inline void copy_tree(const fs::path& from, const fs::path& to) {
    fs::create_directories(to);
    fs::copy(from, to,
             fs::copy_options::recursive | fs::copy_options::overwrite_existing);
}

// Runs fn and reports the kind of the Error it threw ("" when it did not).
template <typename Fn>
std::string thrown_kind(Fn&& fn) {
    try {
        fn();
    } catch (const codemorph::Error& e) {
        return e.kind();
    } catch (...) {
        return "<not a codemorph::Error>";
    }
    return "";
}

inline codemorph::FileContext parse_fixture(const fs::path& path) {
    codemorph::SourceFile src;
    src.path = path.filename();
    src.language = codemorph::language_from_extension(path);
    src.text = codemorph::util::read_file(path);
    return codemorph::parse_file(src);
}

// Plants one canned transcript per (file, ordinal) reply so a replay-gateway
// run of `strategy` over the manifest's pristine sources finds them.
inline void seed_replay(const fs::path& manifest_path, const std::string& strategy_name,
                        const std::map<std::pair<std::string, int>, std::string>& replies,
                        const fs::path& replay_dir) {
    using namespace codemorph;
    ProjectManifest manifest = load_manifest(manifest_path);
    StrategyRegistry registry;
    StrategySpec strategy = registry.resolve(strategy_name);
    fs::create_directories(replay_dir);
    for (const auto& [key, reply] : replies) {
        const auto& [file, t] = key;
        for (const auto& mf : manifest.files) {
            if (mf.path != file) {
                continue;
            }
            SourceFile src{mf.path, mf.language, util::read_file(manifest.root / mf.path)};
            FileContext ctx = parse_file(src);
            PromptBundle bundle =
                gen_prompt(strategy, {ctx.functions.at(static_cast<std::size_t>(t - 1))}, ctx);
            std::string k = transcript_key(bundle.system_text, bundle.user_text);
            nlohmann::json doc;
            doc["responses"] = nlohmann::json::array({reply});
            util::write_file(replay_dir / (k + ".json"), doc.dump());
        }
    }
}

} // namespace testsup
