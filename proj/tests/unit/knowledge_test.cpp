#include "reqsolve/errors.hpp"
#include "reqsolve/knowledge.hpp"

#include "../support/index_builder.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cstdlib>

using namespace reqsolve;
using testutil::IndexBuilder;
using testutil::TempDir;
using testutil::write_file;

namespace {

TargetEnvironment env_for(const char* v) { return TargetEnvironment{Version::parse(v)}; }

std::vector<std::string> strs(const std::vector<Version>& vs) {
    std::vector<std::string> out;
    for (const auto& v : vs) out.push_back(v.raw());
    return out;
}

}  // namespace

TEST(Marker, EvaluationTable) {
    const auto env = env_for("3.8.10");
    const std::vector<std::pair<std::string, bool>> table = {
        {"python_version < \"3.7\"", false},
        {"python_version >= '3.6'", true},
        {"python_version == \"3.8\"", true},
        {"python_full_version >= \"3.8.5\"", true},
        {"sys_platform == 'win32'", false},
        {"sys_platform != \"win32\" and python_version > '3'", true},
        {"platform_system == 'Windows' or python_version < '3.9'", true},
        {"(os_name == 'nt' or os_name == 'posix') and implementation_name == 'cpython'", true},
        {"extra == 'test'", false},
        {"python_version < '3' or extra == \"docs\"", false},
        {"'linux' in sys_platform", true},
        {"platform_machine not in 'arm64 aarch64'", true},
        {"platform_python_implementation == \"PyPy\"", false},
        {"\"3.6\" < python_version", true},
        {"os.name == 'posix'", true},
    };
    for (const auto& [marker, expected] : table) EXPECT_EQ(evaluate_marker(marker, env), expected) << marker;
    EXPECT_THROW(evaluate_marker("python_version <", env), MalformedRequirement);
    EXPECT_THROW(evaluate_marker("(python_version < '3'", env), MalformedRequirement);
}

TEST(Dependency, ParsesRequiresDistEntries) {
    const auto env = env_for("3.8");
    auto d = parse_dependency("torch (==1.4.0)", env);
    ASSERT_TRUE(d);
    EXPECT_EQ(d->name, PackageName("torch"));
    EXPECT_TRUE(d->spec.contains(Version::parse("1.4.0")));
    EXPECT_FALSE(d->spec.contains(Version::parse("1.4.1")));

    d = parse_dependency("Pillow>=4.1.1", env);
    EXPECT_EQ(d->name.raw(), "Pillow");
    d = parse_dependency("requests[security,socks] >=2.0,<3 ; python_version >= '3'", env);
    ASSERT_TRUE(d);
    EXPECT_EQ(d->extras, (std::set<std::string>{"security", "socks"}));
    EXPECT_TRUE(d->spec.contains(Version::parse("2.5")));
    EXPECT_FALSE(parse_dependency("enum34; python_version < '3.4'", env));
    EXPECT_FALSE(parse_dependency("pytest ; extra == 'test'", env));
    d = parse_dependency("numpy", env);
    EXPECT_TRUE(d->spec.empty());
    d = parse_dependency("pkg @ https://example.org/pkg.zip", env);
    EXPECT_TRUE(d->spec.empty());
    EXPECT_THROW(parse_dependency("!!bad", env), MalformedRequirement);
    EXPECT_THROW(parse_dependency("x >=>1", env), MalformedRequirement);
}

TEST(Archive, ExtractsPythonSourcesFromTarAndZip) {
    TempDir d;
    write_file(d / "pkg-1.0/pkg/__init__.py", "X = 1\n");
    write_file(d / "pkg-1.0/pkg/data.txt", "ignored");
    write_file(d / "pkg-1.0/pkg/stub.pyi", "def f() -> None: ...\n");
    const auto cmd = "cd '" + d.path().string() +
                     "' && tar czf pkg.tar.gz pkg-1.0 && python3 -m zipfile -c pkg.zip pkg-1.0 >/dev/null";
    ASSERT_EQ(std::system(cmd.c_str()), 0);

    for (const char* name : {"pkg.tar.gz", "pkg.zip"}) {
        const auto out = d / (std::string("out-") + name);
        extract_python_sources(d / name, out);
        EXPECT_TRUE(fs::exists(out / "pkg-1.0/pkg/__init__.py")) << name;
        EXPECT_TRUE(fs::exists(out / "pkg-1.0/pkg/stub.pyi")) << name;
        EXPECT_FALSE(fs::exists(out / "pkg-1.0/pkg/data.txt")) << name;
        EXPECT_EQ(testutil::read_file(out / "pkg-1.0/pkg/__init__.py"), "X = 1\n");
    }
    EXPECT_THROW(extract_python_sources(d / "missing.tar.gz", d / "x"), SourceUnavailable);
    write_file(d / "bad.rar", "x");
    EXPECT_THROW(extract_python_sources(d / "bad.rar", d / "y"), SourceUnavailable);
}

TEST(Archive, EntriesEscapingTheDestinationAreSkipped) {
    TempDir d;
    const auto script = "import tarfile, io\n"
                        "t = tarfile.open('" + (d / "evil.tar.gz").string() + "', 'w:gz')\n"
                        "for n in ['../escape.py', 'ok/fine.py', '/abs.py']:\n"
                        "    data = b'x = 1\\n'\n"
                        "    i = tarfile.TarInfo(n); i.size = len(data); t.addfile(i, io.BytesIO(data))\n"
                        "t.close()\n";
    write_file(d / "mk.py", script);
    ASSERT_EQ(std::system(("python3 '" + (d / "mk.py").string() + "'").c_str()), 0);
    extract_python_sources(d / "evil.tar.gz", d / "out");
    EXPECT_TRUE(fs::exists(d / "out/ok/fine.py"));
    EXPECT_FALSE(fs::exists(d / "escape.py"));
    EXPECT_FALSE(fs::exists(d / "out/abs.py"));
}

class StoreTest : public ::testing::Test {
protected:
    void SetUp() override {
        IndexBuilder b(index_.path());
        b.add("torch", {"1.3.0", {}, {{"torch/__init__.py", "def load(f):\n    pass\n"}}})
            .add("torch", {"1.4.0", {"numpy", "future ; python_version < '3'"}, {{"torch/__init__.py", ""}}})
            .add("torch", {"1.5.0rc1", {}, {{"torch/__init__.py", ""}}})
            .add("torch", {"1.5.0", {}, {{"torch/__init__.py", ""}}, ">=3.9"})
            .add("torch", {"1.2.0", {}, {{"torch/__init__.py", ""}}, "", true})
            .add("torch", {"not-a-version", {}, {{"torch/__init__.py", ""}}})
            .add("TorchVision", {"0.5.0", {"torch (==1.4.0)", "pillow (>=4.1.1)", "bad entry ((", "torch>=1.0"},
                                  {{"torchvision/__init__.py", "from .models import resnet\n"},
                                   {"torchvision/models.py", "def resnet(pretrained=False):\n    pass\n"}}});
        b.write();
        options_.cache_dir = cache_.path();
        options_.environment = env_for("3.8");
    }

    KnowledgeStore online() { return KnowledgeStore(make_index_client("file://" + index_.path().string()), options_); }
    KnowledgeStore offline() {
        auto o = options_;
        o.offline = true;
        return KnowledgeStore(nullptr, o);
    }

    TempDir index_;
    TempDir cache_;
    KnowledgeOptions options_;
};

TEST_F(StoreTest, CandidatesAreFilteredAndAscending) {
    auto store = online();
    EXPECT_EQ(strs(store.candidates("torch")), (std::vector<std::string>{"1.3.0", "1.4.0"}));
    store.allow_prerelease("torch", Version::parse("1.5.0rc1"));
    EXPECT_EQ(strs(store.candidates("torch")), (std::vector<std::string>{"1.3.0", "1.4.0", "1.5.0rc1"}));
    EXPECT_FALSE(store.warnings().empty());
    EXPECT_FALSE(store.known("nonexistent"));
    EXPECT_THROW(store.candidates("nonexistent"), UnknownPackage);
}

TEST_F(StoreTest, DependenciesApplyMarkersAndMergeDuplicates) {
    auto store = online();
    const auto& deps = store.dependencies("torch", Version::parse("1.4"));
    ASSERT_EQ(deps.size(), 1u);
    EXPECT_EQ(deps[0].name, PackageName("numpy"));

    const auto& tv = store.dependencies("torchvision", Version::parse("0.5.0"));
    ASSERT_EQ(tv.size(), 2u);
    EXPECT_EQ(tv[0].name, PackageName("torch"));
    EXPECT_FALSE(tv[0].spec.contains(Version::parse("1.3.0")));
    EXPECT_TRUE(tv[0].spec.contains(Version::parse("1.4.0")));
    EXPECT_THROW(store.dependencies("torch", Version::parse("9.9")), MetadataMissing);
}

TEST_F(StoreTest, CodeInventoryIsCachedForOfflineUse) {
    {
        auto store = online();
        const auto& code = store.code("torchvision", Version::parse("0.5.0"));
        EXPECT_TRUE(code.modules.contains("torchvision.models"));
        EXPECT_EQ(code.simplify.names.at("torchvision.resnet"), "torchvision.models.resnet");
        (void)store.dependencies("torch", Version::parse("1.4.0"));
    }
    for (const char* f : {"versions.json", "0.5.0/meta.json", "0.5.0/modules.json", "0.5.0/apis.json", "0.5.0/simplify.json"})
        EXPECT_TRUE(fs::exists(cache_ / ("torchvision/" + std::string(f)))) << f;
    EXPECT_TRUE(fs::is_directory(cache_ / "torchvision/0.5.0/src"));

    fs::remove_all(index_.path());
    auto store = offline();
    EXPECT_EQ(store.candidates("torchvision").size(), 1u);
    EXPECT_EQ(store.code("torchvision", Version::parse("0.5.0")).apis.apis.count("torchvision.models.resnet"), 1u);
    EXPECT_EQ(store.dependencies("torch", Version::parse("1.4.0")).size(), 1u);
    EXPECT_THROW(store.candidates("pillow"), IndexUnavailable);
    EXPECT_THROW(store.dependencies("torch", Version::parse("1.3.0")), IndexUnavailable);
}

TEST_F(StoreTest, CorruptedCacheIsRefetched) {
    { (void)online().candidates("torch"); }
    write_file(cache_ / "torch/versions.json", "{ not json");
    auto store = online();
    EXPECT_EQ(store.candidates("torch").size(), 2u);
    EXPECT_NO_THROW((void)nlohmann::json::parse(testutil::read_file(cache_ / "torch/versions.json")));
}

TEST_F(StoreTest, CacheFilesAreDeterministic) {
    { (void)online().code("torchvision", Version::parse("0.5.0")); }
    const auto first = testutil::read_file(cache_ / "torchvision/0.5.0/apis.json");
    fs::remove_all(cache_ / "torchvision");
    { (void)online().code("torchvision", Version::parse("0.5.0")); }
    EXPECT_EQ(testutil::read_file(cache_ / "torchvision/0.5.0/apis.json"), first);
}
