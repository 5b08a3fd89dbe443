# main.py
from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from forge.pipeline import configure_logging
from routers import circuits, runs

configure_logging()

app = FastAPI(
    title="defect-forge API",
    description="Clifford+T to ICM, braided-defect geometry and distillation planning",
    version="0.1.0",
)

# Add CORS middleware
app.add_middleware(
    CORSMiddleware,
    allow_origins=["http://localhost:3000", "http://localhost:5173"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Include routers
app.include_router(circuits.router, prefix="/circuits", tags=["Circuits"])
app.include_router(runs.router, prefix="/runs", tags=["Runs"])


@app.get("/", tags=["Root"])
def read_root():
    return {"message": "defect-forge: surface-code compiler service"}
