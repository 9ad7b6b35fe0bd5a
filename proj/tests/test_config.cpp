#include <doctest.h>

#include "repdyn/config.hpp"
#include "repdyn/error.hpp"

using namespace repdyn;

TEST_CASE("config round-trips through JSON losslessly") {
    TrainRunConfig c;
    c.run_id = "adam-eps";
    c.model = ModelKind::mlp;
    c.width_k = 5;
    c.optimizer.epsilon = 0.01;
    c.optimizer.weight_decay = 1e-3;
    c.optimizer.decoupled_weight_decay = true;
    c.label_noise_fraction = 0.2;
    c.seeds = {9, 8, 7};
    c.total_epochs = 12;
    c.epoch_grid = EpochGrid({0, 1, 5, 12});
    c.frozen_layers = {"fc1"};
    c.atypical = AtypicalConfig{"scores.csv", 0.5, SubsetDirection::less};
    const auto back = config_from_text(to_json(c).dump());
    CHECK(back == c);
}

TEST_CASE("epoch grid shorthands") {
    auto c = config_from_text(R"({"total_epochs": 20, "epoch_grid": {"every": 5}})");
    CHECK(c.epoch_grid.epochs() == std::vector<std::uint32_t>{0, 5, 10, 15, 20});
    c = config_from_text(R"({"total_epochs": 10, "epoch_grid": "dense"})");
    CHECK(c.epoch_grid.size() == 10);
    c = config_from_text(R"({"total_epochs": 3})");
    CHECK(c.epoch_grid.epochs() == std::vector<std::uint32_t>{0, 1, 2, 3});
}

TEST_CASE("malformed or invalid configs raise config errors") {
    auto kind_of = [](const std::string& text) {
        try {
            config_from_text(text);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::invalid_argument;
    };
    CHECK(kind_of("{\"model\": ") == ErrorKind::config);
    CHECK(kind_of(R"({"modle": "mlp"})") == ErrorKind::config);
    CHECK(kind_of(R"({"optimizer": {"epsilon": 0}})") == ErrorKind::config);
    CHECK(kind_of(R"({"optimizer": {"kind": "sgd", "momentum": 1.0}})") == ErrorKind::config);
    CHECK(kind_of(R"({"label_noise_fraction": 1.0})") == ErrorKind::config);
    CHECK(kind_of(R"({"total_epochs": 5, "epoch_grid": [0, 10]})") == ErrorKind::config);
    CHECK(kind_of(R"({"epoch_grid": [0, 3, 2]})") == ErrorKind::config);
    CHECK(kind_of(R"({"frozen_layers": ["conv9"]})") == ErrorKind::config);
    try {
        config_from_text("{\n  \"model\": \"mlp\",,\n}");
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("byte") != std::string::npos);
    }
}
