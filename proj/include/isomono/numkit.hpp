#ifndef ISOMONO_NUMKIT_HPP
#define ISOMONO_NUMKIT_HPP

#include "isomono/error.hpp"
#include "isomono/numkit/linalg.hpp"
#include "isomono/numkit/matrix2.hpp"
#include "isomono/numkit/ode.hpp"
#include "isomono/numkit/polynomial.hpp"
#include "isomono/numkit/scalar.hpp"
#include "isomono/numkit/transport.hpp"

#endif
