# Maps package for the exterior slit conformal maps
