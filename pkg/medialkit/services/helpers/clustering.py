import math

import numpy as np
from numpy.typing import NDArray
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial import cKDTree
from scipy.spatial.distance import directed_hausdorff, pdist

from medialkit.core.numeric import chord_to_angle


class ClusterHelper:
    """
    Point-cloud helpers shared by the geometry services.

    Rules:
    - pure numpy / scipy
    - deterministic: ties keep input order
    """

    # 1️⃣ Single-linkage flat clusters, numbered by first appearance
    @staticmethod
    def single_linkage(points: NDArray, threshold: float) -> NDArray:
        if len(points) == 1:
            return np.zeros(1, dtype=int)
        raw = fcluster(linkage(points, method="single"), t=threshold, criterion="distance")
        _, first, inverse = np.unique(raw, return_index=True, return_inverse=True)
        order = np.argsort(np.argsort(first))
        return order[inverse]

    # 2️⃣ At most k clusters (directions, anchors)
    @staticmethod
    def at_most(points: NDArray, k: int) -> NDArray:
        if len(points) <= k:
            return np.arange(len(points))
        raw = fcluster(linkage(points, method="single"), t=k, criterion="maxclust")
        reps = []
        for label in np.unique(raw):
            members = np.flatnonzero(raw == label)
            centroid = points[members].mean(axis=0)
            reps.append(members[np.argmin(np.linalg.norm(points[members] - centroid, axis=1))])
        return np.sort(np.array(reps))

    # 3️⃣ Member closest to the cluster centroid
    @staticmethod
    def representative(members: NDArray) -> NDArray:
        centroid = members.mean(axis=0)
        return members[int(np.argmin(np.linalg.norm(members - centroid, axis=1)))]

    # 4️⃣ Largest pairwise distance
    @staticmethod
    def diameter(points: NDArray) -> float:
        return float(pdist(points).max()) if len(points) > 1 else 0.0

    # 5️⃣ Hausdorff distances
    @staticmethod
    def directed(a: NDArray, b: NDArray) -> float:
        """sup over a of the distance to b (0 for empty a, inf for empty b)."""
        if len(a) == 0:
            return 0.0
        if len(b) == 0:
            return math.inf
        return float(directed_hausdorff(a, b)[0])

    @staticmethod
    def hausdorff(a: NDArray, b: NDArray) -> float:
        return max(ClusterHelper.directed(a, b), ClusterHelper.directed(b, a))

    # 6️⃣ Angular versions on unit directions (radians, π when one side is empty)
    @staticmethod
    def directed_angle(a: NDArray, b: NDArray) -> float:
        if len(a) == 0:
            return 0.0
        if len(b) == 0:
            return math.pi
        chords, _ = cKDTree(b).query(a)
        return float(np.max(chord_to_angle(chords)))

    @staticmethod
    def angle_hausdorff(a: NDArray, b: NDArray) -> float:
        if len(a) == 0 and len(b) == 0:
            return 0.0
        return max(ClusterHelper.directed_angle(a, b), ClusterHelper.directed_angle(b, a))
