#include "reqsolve/config.hpp"

#include "reqsolve/errors.hpp"

#include "test_util.hpp"

#include <cstdlib>

#include <gtest/gtest.h>

using namespace reqsolve;
using testutil::TempDir;
using testutil::write_file;

namespace {

const char* svoice = R"(# svoice upgrade
project_path = project
requirements_path = requirements.txt
target_name = torch
current_version = 1.6.0
target_version = 1.9.0
knowledge_path = /var/cache/kb
)";

struct EnvGuard {
    EnvGuard() { ::unsetenv("REQSOLVE_KNOWLEDGE"); }
    ~EnvGuard() { ::unsetenv("REQSOLVE_KNOWLEDGE"); }
};

}  // namespace

TEST(Config, KeyValue) {
    auto c = parse_config(svoice, "/work");
    EXPECT_EQ(c.project_path, fs::path("/work/project"));
    EXPECT_EQ(c.requirements_path, fs::path("/work/requirements.txt"));
    EXPECT_EQ(c.target_name, PackageName("torch"));
    EXPECT_EQ(c.current_version, Version::parse("1.6.0"));
    EXPECT_EQ(c.target_version, Version::parse("1.9.0"));
    EXPECT_EQ(c.knowledge_path, fs::path("/var/cache/kb"));
    EXPECT_EQ(c.output_dir, fs::path("/work"));
    EXPECT_EQ(c.max_iterations, 50);
    EXPECT_FALSE(c.offline);
    EXPECT_FALSE(c.index_url);
}

TEST(Config, Json) {
    auto c = parse_config(R"({"project": "p", "requirements": "r.txt", "target": "numpy",
                              "current_version": "1.19.0", "target_version": "1.24.0",
                              "offline": true, "max_iterations": 7, "index_url": "file:///idx",
                              "python_version": "3.10", "output_dir": null})",
                          "/base");
    EXPECT_EQ(c.project_path, fs::path("/base/p"));
    EXPECT_TRUE(c.offline);
    EXPECT_EQ(c.max_iterations, 7);
    EXPECT_EQ(c.index_url, "file:///idx");
    EXPECT_EQ(c.python_version, "3.10");
}

TEST(Config, Rejections) {
    std::string missing = svoice;
    missing.erase(missing.find("target_version"), std::string("target_version = 1.9.0\n").size());
    EXPECT_THROW(parse_config(missing, "/"), ConfigInvalid);
    EXPECT_THROW(parse_config(std::string(svoice) + "colour = blue\n", "/"), ConfigInvalid);
    EXPECT_THROW(parse_config(std::string(svoice) + "max_iterations = 0\n", "/"), ConfigInvalid);
    EXPECT_THROW(parse_config(std::string(svoice) + "offline = maybe\n", "/"), ConfigInvalid);
    EXPECT_THROW(parse_config("no separator here\n", "/"), ConfigInvalid);
    EXPECT_THROW(parse_config("[1, 2]", "/"), ConfigInvalid);
    EXPECT_THROW(parse_config("{broken", "/"), ConfigInvalid);
    std::string bad_version = svoice;
    bad_version.replace(bad_version.find("1.9.0"), 5, "one");
    EXPECT_THROW(parse_config(bad_version, "/"), ConfigInvalid);
}

TEST(Config, LoadValidateAndPinMismatch) {
    EnvGuard env;
    TempDir dir;
    write_file(dir / "svoice.conf", svoice);
    write_file(dir / "project/main.py", "import torch\n");
    write_file(dir / "requirements.txt", "torch==1.6.0\ntorchvision==0.7.0\n");
    auto c = load_config(dir / "svoice.conf");
    EXPECT_EQ(validate_config(c).size(), 2u);

    ::setenv("REQSOLVE_KNOWLEDGE", (dir / "kb").c_str(), 1);
    EXPECT_EQ(load_config(dir / "svoice.conf").knowledge_path, dir / "kb");

    write_file(dir / "requirements.txt", "torch==1.5.0\n");
    EXPECT_THROW(validate_config(c), PinMismatch);
    write_file(dir / "requirements.txt", "numpy==1.0\n");
    EXPECT_THROW(validate_config(c), PinMismatch);
    write_file(dir / "requirements.txt", "torch>=1.6\n");
    EXPECT_THROW(validate_config(c), ConfigInvalid);

    c.project_path = dir / "absent";
    EXPECT_THROW(validate_config(c), ConfigInvalid);
    EXPECT_THROW(load_config(dir / "absent.conf"), ConfigInvalid);
}
