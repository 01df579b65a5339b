#pragma once

#include "nodal_atlas/asymptotics.hpp"
#include "nodal_atlas/error.hpp"
#include "nodal_atlas/generators.hpp"
#include "nodal_atlas/involution.hpp"
#include "nodal_atlas/io.hpp"
#include "nodal_atlas/mesh.hpp"
#include "nodal_atlas/nodal.hpp"
#include "nodal_atlas/parallel.hpp"
#include "nodal_atlas/pipeline.hpp"
#include "nodal_atlas/restriction.hpp"
#include "nodal_atlas/spectral.hpp"
#include "nodal_atlas/union_find.hpp"
