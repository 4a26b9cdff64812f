#pragma once

#include <memory>
#include <string>
#include <vector>

#include "vqd/backend.hpp"
#include "vqd/mock.hpp"

namespace vqd::testing {

/// Path of a file in the source tree.
inline std::string source_path(const std::string& relative) { return std::string(VQD_SOURCE_DIR) + "/" + relative; }

inline SceneObject object(std::int64_t id, std::string category, Box box, std::vector<std::string> attributes = {},
                          double depth = 1.0) {
    return SceneObject{id, std::move(category), box, std::move(attributes), depth};
}

inline SceneGraph scene(std::string image_ref, std::vector<SceneObject> objects, double width = 640,
                        double height = 480) {
    SceneGraph s;
    s.image_ref = std::move(image_ref);
    s.extent = {width, height};
    s.objects = std::move(objects);
    return s;
}

struct World {
    std::shared_ptr<SceneOracle> oracle;
    std::shared_ptr<ScriptedLM> code_lm = std::make_shared<ScriptedLM>("code_lm");
    std::shared_ptr<ScriptedLM> instruct_lm = std::make_shared<ScriptedLM>("instruct_lm");
    std::shared_ptr<ScriptedLM> vlm_lm = std::make_shared<ScriptedLM>("vlm");

    explicit World(std::vector<SceneGraph> scenes) : oracle(std::make_shared<SceneOracle>(std::move(scenes))) {}

    BackendSuite suite() const {
        auto vlm = std::make_shared<CompositeBackend>(vlm_lm, oracle);
        return BackendSuite{code_lm, instruct_lm, vlm, oracle, oracle, oracle};
    }
};

}  // namespace vqd::testing
