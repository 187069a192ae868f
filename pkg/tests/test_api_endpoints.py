"""
Test suite for API endpoints.
"""

import unittest
import sys
import os
from unittest.mock import patch

# Add backend to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'backend'))

from fastapi.testclient import TestClient
from main import app


class TestAPIEndpoints(unittest.TestCase):
    """Test the FastAPI endpoints."""

    def setUp(self):
        """Set up test client."""
        self.client = TestClient(app)

    def test_health_endpoint(self):
        """Test health check endpoint."""
        response = self.client.get("/api/health")
        self.assertEqual(response.status_code, 200)
        data = response.json()
        self.assertEqual(data['status'], 'healthy')
        self.assertIn('version', data)
        self.assertGreaterEqual(data['threads'], 1)

    @patch.dict(os.environ, {"SPINFORM_THREADS": "many"})
    def test_health_with_bad_thread_count(self):
        response = self.client.get("/api/health")
        self.assertEqual(response.status_code, 500)

    def test_families_endpoint(self):
        """Test family listing endpoint."""
        response = self.client.get("/api/families")
        self.assertEqual(response.status_code, 200)
        ids = {family['id'] for family in response.json()}
        self.assertEqual(ids, {"freedman", "black_brane", "radial", "killing_warped"})

    def test_algebra_endpoint(self):
        """Test the algebra suite endpoint."""
        response = self.client.post("/api/algebra", json={"p": 2, "q": 0, "samples": 3, "seed": 1})
        self.assertEqual(response.status_code, 200)
        data = response.json()
        self.assertTrue(data['summary']['all_passed'])
        self.assertEqual(data['summary']['command'], 'algebra')
        self.assertEqual(data['entries'][0]['params']['p'], 2)

    def test_algebra_bad_signature(self):
        response = self.client.post("/api/algebra", json={"p": 0, "q": 0})
        self.assertEqual(response.status_code, 400)

    def test_squares_bad_kind(self):
        response = self.client.post("/api/squares", json={"p": 2, "q": 0, "kind": "quadratic"})
        self.assertEqual(response.status_code, 400)

    def test_verify_unknown_family(self):
        response = self.client.post("/api/verify", json={"family": "kerr"})
        self.assertEqual(response.status_code, 404)

    def test_verify_perturbed_freedman(self):
        response = self.client.post(
            "/api/verify", json={"family": "freedman", "points": 2, "perturb": {"H": 0.1}}
        )
        self.assertEqual(response.status_code, 200)
        summary = response.json()['summary']
        self.assertFalse(summary['all_passed'])
        self.assertIn("freedman/field_equations", summary['failed_checks'])

    def test_ode_endpoint(self):
        """Test radial integration endpoint."""
        payload = {"lambda_": -0.5, "e": 1.0, "m1": 0.5, "m2": 1.0, "step": 0.01}
        response = self.client.post("/api/ode", json=payload)
        self.assertEqual(response.status_code, 200)
        data = response.json()
        self.assertEqual(len(data['trajectory']), data['report']['artifacts']['trajectory_points'])
        ids = [entry['check_id'] for entry in data['report']['entries']]
        self.assertIn("ode/constraint", ids)

    def test_ode_constraint_violation(self):
        response = self.client.post("/api/ode", json={"lambda_": 0.5, "e": 1.0})
        self.assertEqual(response.status_code, 422)
        self.assertIn("discriminant", response.json()['detail'])


if __name__ == '__main__':
    unittest.main()
